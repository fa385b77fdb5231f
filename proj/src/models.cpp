#include "qnuis/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qnuis/errors.hpp"

namespace qnuis {

namespace {

using Jac3 = Eigen::Matrix<double, 3, Eigen::Dynamic>;

std::string describe(const RVector& v) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ")";
  return os.str();
}

RVector vec(std::initializer_list<double> xs) {
  RVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

bool inside_ball(double r2, double margin) { return r2 < 1.0 - margin; }

double tanh_dot(double x) {
  const double c = std::tanh(x);
  return 1.0 - c * c;
}

}  // namespace

ParametricModel make_bloch_model(std::string name, int n, int m, BlochFn s, BlochJacobianFn ds,
                                 std::function<bool(const RVector&, double)> domain, RVector lo, RVector hi) {
  ParametricModel model;
  model.name = std::move(name);
  model.n = n;
  model.m = m;
  model.dim = 2;
  model.bloch_fn = s;
  model.bloch_jacobian_fn = ds;
  model.state_fn = [s](const RVector& th) { return pauli::state(s(th)); };
  if (ds) {
    model.deriv_fn = [ds](const RVector& th) {
      const Jac3 d = ds(th);
      std::vector<CMatrix> out;
      out.reserve(static_cast<std::size_t>(d.cols()));
      for (Eigen::Index j = 0; j < d.cols(); ++j) out.push_back(0.5 * pauli::dot(d.col(j)));
      return out;
    };
  }
  model.domain = std::move(domain);
  model.sample_lo = std::move(lo);
  model.sample_hi = std::move(hi);
  return model;
}

void require_in_domain(const ParametricModel& model, const RVector& theta, const Tolerances& tol) {
  if (theta.size() != model.n) {
    std::ostringstream os;
    os << "model " << model.name << " expects " << model.n << " parameters, got " << theta.size();
    throw Error(ErrorCode::ShapeMismatch, os.str());
  }
  if (!theta.allFinite() || !model.domain(theta, tol.domain_margin))
    throw Error(ErrorCode::OutOfDomain, "theta=" + describe(theta) + " is outside the domain of model " + model.name);
}

CMatrix evaluate(const ParametricModel& model, const RVector& theta, const Tolerances& tol) {
  require_in_domain(model, theta, tol);
  return model.state_fn(theta);
}

std::vector<CMatrix> finite_difference_derivatives(const ParametricModel& model, const RVector& theta,
                                                   const Tolerances& tol) {
  require_in_domain(model, theta, tol);
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(model.n));
  for (int i = 0; i < model.n; ++i) {
    double h = tol.fd_step * std::max(1.0, std::abs(theta(i)));
    bool ok = false;
    for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
      RVector plus = theta, minus = theta;
      plus(i) += h;
      minus(i) -= h;
      if (model.domain(plus, tol.domain_margin) && model.domain(minus, tol.domain_margin)) {
        CMatrix d = (model.state_fn(plus) - model.state_fn(minus)) / (2.0 * h);
        out.push_back(0.5 * (d + d.adjoint()));
        ok = true;
      } else {
        h /= 10.0;
      }
    }
    if (!ok) {
      std::ostringstream os;
      os << "finite-difference step for parameter " << i << " leaves the domain at theta=" << describe(theta);
      throw Error(ErrorCode::StepExitsDomain, os.str());
    }
  }
  return out;
}

std::vector<CMatrix> derivatives(const ParametricModel& model, const RVector& theta, const Tolerances& tol) {
  if (!model.deriv_fn) return finite_difference_derivatives(model, theta, tol);
  require_in_domain(model, theta, tol);
  return model.deriv_fn(theta);
}

Eigen::Vector3d bloch_vector(const ParametricModel& model, const RVector& theta, const Tolerances& tol) {
  require_in_domain(model, theta, tol);
  if (model.bloch_fn) return model.bloch_fn(theta);
  if (model.dim != 2) throw Error(ErrorCode::InvalidArgument, "model " + model.name + " is not a qubit model");
  return pauli::components(model.state_fn(theta));
}

Jac3 bloch_jacobian(const ParametricModel& model, const RVector& theta, const Tolerances& tol) {
  if (model.bloch_jacobian_fn) {
    require_in_domain(model, theta, tol);
    return model.bloch_jacobian_fn(theta);
  }
  if (model.dim != 2) throw Error(ErrorCode::InvalidArgument, "model " + model.name + " is not a qubit model");
  const auto d = derivatives(model, theta, tol);
  Jac3 out(3, model.n);
  for (int j = 0; j < model.n; ++j) out.col(j) = pauli::components(d[static_cast<std::size_t>(j)]);
  return out;
}

std::vector<std::string> builtin_names() { return {"A", "B", "C", "D", "E", "F"}; }

ParametricModel make_builtin(const std::string& name, const std::vector<double>& fixed) {
  constexpr double pi = std::numbers::pi;
  auto no_fixed = [&]() {
    if (!fixed.empty()) throw Error(ErrorCode::BadFixedParameter, "model " + name + " takes no fixed parameters");
  };

  if (name == "A") {
    no_fixed();
    return make_bloch_model(
        "A", 2, 1, [](const RVector& t) { return Eigen::Vector3d(t(0), t(1), 0.0); },
        [](const RVector&) {
          Jac3 d = Jac3::Zero(3, 2);
          d(0, 0) = 1.0;
          d(1, 1) = 1.0;
          return d;
        },
        [](const RVector& t, double margin) { return inside_ball(t.squaredNorm(), margin); }, vec({-1, -1}),
        vec({1, 1}));
  }
  if (name == "B" || name == "D") {
    no_fixed();
    return make_bloch_model(
        name, 3, name == "B" ? 1 : 2, [](const RVector& t) { return Eigen::Vector3d(t(0), t(1), t(2)); },
        [](const RVector&) { return Jac3(Jac3::Identity(3, 3)); },
        [](const RVector& t, double margin) { return inside_ball(t.squaredNorm(), margin); }, vec({-1, -1, -1}),
        vec({1, 1, 1}));
  }
  if (name == "C") {
    if (fixed.size() != 1) throw Error(ErrorCode::BadFixedParameter, "model C needs exactly one fixed value theta0");
    const double t0 = fixed[0];
    if (!std::isfinite(t0) || std::abs(t0) >= 1.0)
      throw Error(ErrorCode::BadFixedParameter, "model C needs |theta0| < 1");
    const double r = std::sqrt(1.0 - t0 * t0);
    return make_bloch_model(
        "C", 2, 1, [t0](const RVector& t) { return Eigen::Vector3d(t(0), t(1), t0); },
        [](const RVector&) {
          Jac3 d = Jac3::Zero(3, 2);
          d(0, 0) = 1.0;
          d(1, 1) = 1.0;
          return d;
        },
        [t0](const RVector& t, double margin) { return inside_ball(t.squaredNorm() + t0 * t0, margin); },
        vec({-r, -r}), vec({r, r}));
  }
  if (name == "E") {
    no_fixed();
    return make_bloch_model(
        "E", 2, 1,
        [](const RVector& t) { return Eigen::Vector3d(t(0) * std::cos(t(1)), t(0) * std::sin(t(1)), 0.0); },
        [](const RVector& t) {
          Jac3 d = Jac3::Zero(3, 2);
          d(0, 0) = std::cos(t(1));
          d(1, 0) = std::sin(t(1));
          d(0, 1) = -t(0) * std::sin(t(1));
          d(1, 1) = t(0) * std::cos(t(1));
          return d;
        },
        [](const RVector& t, double margin) { return t(0) > margin && t(0) < 1.0 - margin; }, vec({0.05, -pi}),
        vec({1.0, pi}));
  }
  if (name == "F") {
    Eigen::Vector3d s0(1.0, 0.0, 0.0);
    if (!fixed.empty()) {
      if (fixed.size() != 3) throw Error(ErrorCode::BadFixedParameter, "model F needs three fixed values s0");
      s0 = Eigen::Vector3d(fixed[0], fixed[1], fixed[2]);
    }
    if (!s0.allFinite() || s0.norm() > 1.0 + 1e-12)
      throw Error(ErrorCode::BadFixedParameter, "model F needs |s0| <= 1");
    if (s0(0) * s0(0) + s0(1) * s0(1) <= 0.0)
      throw Error(ErrorCode::BadFixedParameter, "model F needs s0 with a nonzero xy-component");
    const double norm2 = s0.squaredNorm();
    auto rotate = [s0](double a) {
      return Eigen::Vector3d(s0(0) * std::cos(a) - s0(1) * std::sin(a), s0(0) * std::sin(a) + s0(1) * std::cos(a),
                             s0(2));
    };
    return make_bloch_model(
        "F", 2, 1, [rotate](const RVector& t) { return Eigen::Vector3d(std::exp(-t(1)) * rotate(t(0))); },
        [s0, rotate](const RVector& t) {
          const double damp = std::exp(-t(1));
          Jac3 d = Jac3::Zero(3, 2);
          d(0, 0) = -damp * (s0(0) * std::sin(t(0)) + s0(1) * std::cos(t(0)));
          d(1, 0) = damp * (s0(0) * std::cos(t(0)) - s0(1) * std::sin(t(0)));
          d.col(1) = -damp * rotate(t(0));
          return d;
        },
        [norm2](const RVector& t, double margin) {
          return t(1) > margin && std::exp(-2.0 * t(1)) * norm2 < 1.0 - margin;
        },
        vec({-pi, 0.05}), vec({pi, 2.0}));
  }
  throw Error(ErrorCode::UnknownModel, "unknown model '" + name + "'");
}

Reparametrization identity_reparametrization(int n) {
  Reparametrization r;
  r.name = "identity";
  r.forward = [](const RVector& xi) { return xi; };
  r.jacobian = [n](const RVector&) { return RMatrix(RMatrix::Identity(n, n)); };
  r.inverse = [](const RVector& th) { return th; };
  return r;
}

Reparametrization builtin_reparametrization(const ParametricModel& model) {
  Reparametrization r;
  r.name = model.name + "-orthogonal";
  if (model.name == "A") {
    r.forward = [](const RVector& x) {
      return vec({x(0), std::tanh(x(1)) * std::sqrt(1.0 - x(0) * x(0))});
    };
    r.jacobian = [](const RVector& x) {
      const double q = std::sqrt(1.0 - x(0) * x(0));
      RMatrix j = RMatrix::Identity(2, 2);
      j(1, 0) = -std::tanh(x(1)) * x(0) / q;
      j(1, 1) = tanh_dot(x(1)) * q;
      return j;
    };
    r.inverse = [](const RVector& t) { return vec({t(0), std::atanh(t(1) / std::sqrt(1.0 - t(0) * t(0)))}); };
    r.sample_lo = vec({-0.95, -2.0});
    r.sample_hi = vec({0.95, 2.0});
    return r;
  }
  if (model.name == "B") {
    r.forward = [](const RVector& x) {
      const double q = std::sqrt(1.0 - x(0) * x(0));
      return vec({x(0), std::tanh(x(1)) * q, std::tanh(x(2)) * q});
    };
    r.jacobian = [](const RVector& x) {
      const double q = std::sqrt(1.0 - x(0) * x(0));
      RMatrix j = RMatrix::Identity(3, 3);
      j(1, 0) = -std::tanh(x(1)) * x(0) / q;
      j(2, 0) = -std::tanh(x(2)) * x(0) / q;
      j(1, 1) = tanh_dot(x(1)) * q;
      j(2, 2) = tanh_dot(x(2)) * q;
      return j;
    };
    r.inverse = [](const RVector& t) {
      const double q = std::sqrt(1.0 - t(0) * t(0));
      return vec({t(0), std::atanh(t(1) / q), std::atanh(t(2) / q)});
    };
    r.sample_lo = vec({-0.95, -0.6, -0.6});
    r.sample_hi = vec({0.95, 0.6, 0.6});
    return r;
  }
  if (model.name == "C") {
    // theta0 is recovered from the model's constant z-component.
    const double t0 = model.bloch_fn(RVector::Zero(2))(2);
    const double r0 = 1.0 - t0 * t0;
    r.forward = [r0](const RVector& x) { return vec({x(0), std::tanh(x(1)) * std::sqrt(r0 - x(0) * x(0))}); };
    r.jacobian = [r0](const RVector& x) {
      const double q = std::sqrt(r0 - x(0) * x(0));
      RMatrix j = RMatrix::Identity(2, 2);
      j(1, 0) = -std::tanh(x(1)) * x(0) / q;
      j(1, 1) = tanh_dot(x(1)) * q;
      return j;
    };
    r.inverse = [r0](const RVector& t) { return vec({t(0), std::atanh(t(1) / std::sqrt(r0 - t(0) * t(0)))}); };
    const double b = 0.95 * std::sqrt(r0);
    r.sample_lo = vec({-b, -2.0});
    r.sample_hi = vec({b, 2.0});
    return r;
  }
  if (model.name == "D") {
    r.forward = [](const RVector& x) {
      return vec({x(0), x(1), std::tanh(x(2)) * std::sqrt(1.0 - x(0) * x(0) - x(1) * x(1))});
    };
    r.jacobian = [](const RVector& x) {
      const double q = std::sqrt(1.0 - x(0) * x(0) - x(1) * x(1));
      RMatrix j = RMatrix::Identity(3, 3);
      j(2, 0) = -std::tanh(x(2)) * x(0) / q;
      j(2, 1) = -std::tanh(x(2)) * x(1) / q;
      j(2, 2) = tanh_dot(x(2)) * q;
      return j;
    };
    r.inverse = [](const RVector& t) {
      return vec({t(0), t(1), std::atanh(t(2) / std::sqrt(1.0 - t(0) * t(0) - t(1) * t(1)))});
    };
    r.sample_lo = vec({-0.7, -0.7, -2.0});
    r.sample_hi = vec({0.7, 0.7, 2.0});
    return r;
  }
  throw Error(ErrorCode::UnknownModel, "no built-in orthogonalizing reparametrization for model " + model.name);
}

ParametricModel orthogonalize(const ParametricModel& model, const Reparametrization& repar, const Tolerances& tol) {
  const int n = model.n;
  const int m = model.m;
  auto fwd = repar.forward;
  auto jac = repar.jacobian;
  auto checked_jacobian = [jac, n, m, tol](const RVector& xi) {
    RMatrix j = jac(xi);
    if (j.rows() != n || j.cols() != n) throw Error(ErrorCode::ShapeMismatch, "reparametrization Jacobian has wrong shape");
    if ((j.topLeftCorner(m, m) - RMatrix::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-12 ||
        j.topRightCorner(m, n - m).cwiseAbs().maxCoeff() > 1e-12)
      throw Error(ErrorCode::InvalidArgument, "reparametrization must keep the parameters of interest unchanged");
    if (std::abs(j.determinant()) <= tol.jacobian_det)
      throw Error(ErrorCode::SingularJacobian, "reparametrization Jacobian is singular at xi=" + describe(xi));
    return j;
  };

  ParametricModel out;
  out.name = model.name + "/" + repar.name;
  out.n = n;
  out.m = m;
  out.dim = model.dim;
  auto base_domain = model.domain;
  out.domain = [base_domain, fwd](const RVector& xi, double margin) {
    if (!xi.allFinite()) return false;
    const RVector th = fwd(xi);
    return th.allFinite() && base_domain(th, margin);
  };
  auto base_state = model.state_fn;
  out.state_fn = [base_state, fwd](const RVector& xi) { return base_state(fwd(xi)); };

  if (model.deriv_fn) {
    auto base_deriv = model.deriv_fn;
    out.deriv_fn = [base_deriv, fwd, checked_jacobian, n](const RVector& xi) {
      const auto d = base_deriv(fwd(xi));
      const RMatrix j = checked_jacobian(xi);
      std::vector<CMatrix> res(static_cast<std::size_t>(n), CMatrix::Zero(d.front().rows(), d.front().cols()));
      for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a)
          if (j(a, b) != 0.0) res[static_cast<std::size_t>(b)] += j(a, b) * d[static_cast<std::size_t>(a)];
      return res;
    };
  }
  if (model.bloch_fn) {
    auto base_bloch = model.bloch_fn;
    out.bloch_fn = [base_bloch, fwd](const RVector& xi) { return base_bloch(fwd(xi)); };
    if (model.bloch_jacobian_fn) {
      auto base_jac = model.bloch_jacobian_fn;
      out.bloch_jacobian_fn = [base_jac, fwd, checked_jacobian](const RVector& xi) {
        return Jac3(base_jac(fwd(xi)) * checked_jacobian(xi));
      };
    }
  }
  if (repar.sample_lo.size() == n) {
    out.sample_lo = repar.sample_lo;
    out.sample_hi = repar.sample_hi;
  } else {
    out.sample_lo = model.sample_lo;
    out.sample_hi = model.sample_hi;
  }
  return out;
}

RVector sample_interior(const ParametricModel& model, std::mt19937_64& rng, double eig_margin,
                        const Tolerances& tol) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    RVector th(model.n);
    for (int i = 0; i < model.n; ++i) th(i) = model.sample_lo(i) + (model.sample_hi(i) - model.sample_lo(i)) * u(rng);
    if (!model.domain(th, tol.domain_margin)) continue;
    if (min_eigenvalue(model.state_fn(th)) > eig_margin) return th;
  }
  throw Error(ErrorCode::EmptyFeasibleSet, "could not sample an interior point of model " + model.name);
}

}  // namespace qnuis
