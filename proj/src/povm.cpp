#include "qnuis/povm.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "qnuis/errors.hpp"

namespace qnuis {

namespace {

std::string format_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int scope_size(const ParametricModel& model, Scope scope) { return scope == Scope::Full ? model.n : model.m; }

struct Outcomes {
  std::vector<double> p;
  std::vector<RVector> grad;  // d_j p
};

Outcomes outcome_statistics(const ParametricModel& model, const RVector& theta, const Povm& povm,
                            const Tolerances& tol) {
  const CMatrix rho = evaluate(model, theta, tol);
  const auto d = derivatives(model, theta, tol);
  Outcomes o;
  for (const auto& e : povm.effects) {
    o.p.push_back((rho * e).trace().real());
    RVector g(model.n);
    for (int j = 0; j < model.n; ++j) g(j) = (d[static_cast<std::size_t>(j)] * e).trace().real();
    o.grad.push_back(g);
  }
  return o;
}

RVector scope_theta(const ParametricModel& model, const RVector& theta, Scope scope) {
  return theta.head(scope_size(model, scope));
}

void require_estimator_shape(const ParametricModel& model, const Povm& povm, const Estimator& est) {
  const int k = scope_size(model, est.scope);
  if (est.values.size() != povm.size() || est.labels.size() != povm.size())
    throw Error(ErrorCode::ShapeMismatch, "estimator and POVM have different outcome counts");
  for (std::size_t x = 0; x < povm.size(); ++x) {
    if (est.labels[x] != povm.labels[x])
      throw Error(ErrorCode::ShapeMismatch, "estimator label '" + est.labels[x] + "' does not match POVM outcome '" +
                                                povm.labels[x] + "'");
    if (est.values[x].size() != k) throw Error(ErrorCode::ShapeMismatch, "estimate length does not match scope");
    if (!est.values[x].allFinite()) throw Error(ErrorCode::InvalidArgument, "estimator has non-finite entries");
  }
}

}  // namespace

PovmDiagnostics validate_povm(const Povm& p, const Tolerances& tol) {
  PovmDiagnostics d;
  if (p.effects.empty()) {
    d.valid = false;
    d.issues.push_back("no effects");
    return d;
  }
  if (p.labels.size() != p.effects.size()) {
    d.valid = false;
    d.issues.push_back("label count differs from effect count");
  }
  const auto dim = p.effects.front().rows();
  CMatrix sum = CMatrix::Zero(dim, dim);
  d.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p.effects.size(); ++k) {
    const CMatrix& e = p.effects[k];
    if (e.rows() != dim || e.cols() != dim) {
      d.valid = false;
      d.issues.push_back("effect " + std::to_string(k) + " has the wrong shape");
      return d;
    }
    if (!e.allFinite() || hermitian_defect(e) > tol.hermitian_input) {
      d.valid = false;
      d.issues.push_back("effect " + std::to_string(k) + " is not Hermitian");
      continue;
    }
    const double lo = min_eigenvalue(e);
    d.min_eigenvalue = std::min(d.min_eigenvalue, lo);
    if (lo < -tol.povm_psd) {
      d.valid = false;
      d.issues.push_back("effect " + std::to_string(k) + " has eigenvalue " + format_label(lo) + " below -povm_psd");
    }
    sum += e;
  }
  d.completeness_defect = (sum - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (d.completeness_defect > tol.povm_completeness) {
    d.valid = false;
    d.issues.push_back("effects sum to identity only within " + format_label(d.completeness_defect) +
                       " (povm_completeness)");
  }
  for (std::size_t a = 0; a < p.labels.size(); ++a)
    for (std::size_t b = a + 1; b < p.labels.size(); ++b)
      if (p.labels[a] == p.labels[b]) {
        d.valid = false;
        d.issues.push_back("duplicate label '" + p.labels[a] + "'");
      }
  return d;
}

void require_valid_povm(const Povm& p, const Tolerances& tol) {
  const auto d = validate_povm(p, tol);
  if (d.valid) return;
  std::string msg = "invalid POVM:";
  for (const auto& s : d.issues) msg += " " + s + ";";
  throw Error(ErrorCode::InvalidPovm, msg);
}

Povm pvm_from_observable(const CMatrix& h, const Tolerances& tol) {
  const auto eig = eig_hermitian(h, tol);
  Povm p;
  p.effects = eig.projectors;
  for (double v : eig.eigenvalues) p.labels.push_back(format_label(v));
  return p;
}

Povm bloch_pvm(const Eigen::Vector3d& direction) {
  const double r = direction.norm();
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "PVM direction must be nonzero");
  const Eigen::Vector3d u = direction / r;
  Povm p;
  p.effects = {0.5 * (pauli::identity() - pauli::dot(u)), 0.5 * (pauli::identity() + pauli::dot(u))};
  p.labels = {"-1", "+1"};
  return p;
}

Povm optimal_interest_pvm(const ParametricModel& model, const RVector& theta, const Tolerances& tol) {
  if (model.m != 1) throw Error(ErrorCode::RequiresSingleInterest, "optimal PVM needs exactly one parameter of interest");
  const FisherBundle b = sld_fisher(model, theta, tol);
  const CMatrix& l = b.duals.front();
  const auto d = static_cast<double>(l.rows());
  const CMatrix traceless = l - (l.trace() / d) * CMatrix::Identity(l.rows(), l.cols());
  return pvm_from_observable(0.5 * (traceless + traceless.adjoint()), tol);
}

const RVector& Estimator::at(const std::string& label) const {
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (labels[k] == label) return values[k];
  throw Error(ErrorCode::InvalidArgument, "estimator has no outcome '" + label + "'");
}

Estimator locally_unbiased_estimator(const ParametricModel& model, const RVector& theta, const Povm& povm,
                                     Scope scope, const Tolerances& tol) {
  require_valid_povm(povm, tol);
  const Outcomes o = outcome_statistics(model, theta, povm, tol);
  const int n = model.n;
  const int m = model.m;

  RMatrix J = RMatrix::Zero(n, n);
  for (std::size_t x = 0; x < o.p.size(); ++x)
    if (o.p[x] >= tol.probability_floor) J += o.grad[x] * o.grad[x].transpose() / o.p[x];
  J = 0.5 * (J + J.transpose());

  // Maps the score vector of an outcome to theta_hat - theta.
  RMatrix gain;
  if (scope == Scope::Full || m == n) {
    if (!(condition_number(J) <= tol.singular_condition))
      throw Error(ErrorCode::SingularFisher, "classical Fisher matrix of the POVM is singular");
    gain = J.ldlt().solve(RMatrix::Identity(n, n));
    if (scope == Scope::Interest) gain = gain.topRows(m).eval();
  } else {
    const BlockSplit s = split_blocks(J, m);
    const RMatrix M = s.IN * psd_pinv(s.NN);
    const RMatrix eff = 0.5 * (s.II - M * s.NI + (s.II - M * s.NI).transpose());
    Eigen::JacobiSVD<RMatrix> svd(eff);
    if (svd.singularValues().minCoeff() < tol.score_singular)
      throw Error(ErrorCode::SingularNuisanceScores, "effective interest scores are linearly dependent");
    RMatrix u(m, n);
    u.leftCols(m) = RMatrix::Identity(m, m);
    u.rightCols(n - m) = -M;
    gain = eff.ldlt().solve(u);
  }

  Estimator est;
  est.scope = scope;
  est.labels = povm.labels;
  const RVector base = scope_theta(model, theta, scope);
  for (std::size_t x = 0; x < o.p.size(); ++x) {
    if (o.p[x] < tol.probability_floor) {
      est.values.push_back(base);
    } else {
      est.values.push_back(base + gain * (o.grad[x] / o.p[x]));
    }
  }
  return est;
}

UnbiasednessReport check_local_unbiasedness(const ParametricModel& model, const RVector& theta, const Povm& povm,
                                            const Estimator& est, const Tolerances& tol) {
  require_estimator_shape(model, povm, est);
  const Outcomes o = outcome_statistics(model, theta, povm, tol);
  const int k = scope_size(model, est.scope);
  RVector mean = RVector::Zero(k);
  UnbiasednessReport r;
  r.derivative = RMatrix::Zero(k, model.n);
  for (std::size_t x = 0; x < o.p.size(); ++x) {
    mean += o.p[x] * est.values[x];
    r.derivative += est.values[x] * o.grad[x].transpose();
  }
  r.mean_residual = (mean - scope_theta(model, theta, est.scope)).cwiseAbs().maxCoeff();
  r.derivative_residual = (r.derivative - RMatrix::Identity(k, model.n)).cwiseAbs().maxCoeff();
  r.pass = r.mean_residual < tol.unbiasedness && r.derivative_residual < tol.unbiasedness;
  return r;
}

RMatrix mse_matrix(const ParametricModel& model, const RVector& theta, const Povm& povm, const Estimator& est,
                   const Tolerances& tol) {
  require_estimator_shape(model, povm, est);
  const CMatrix rho = evaluate(model, theta, tol);
  const RVector base = scope_theta(model, theta, est.scope);
  const auto k = base.size();
  RMatrix v = RMatrix::Zero(k, k);
  for (std::size_t x = 0; x < povm.size(); ++x) {
    const double p = (rho * povm.effects[x]).trace().real();
    const RVector dev = est.values[x] - base;
    v += p * dev * dev.transpose();
  }
  return 0.5 * (v + v.transpose());
}

Povm randomize_povms(const Povm& p_star, const Povm& p0, double eps, const Tolerances& tol) {
  require_valid_povm(p_star, tol);
  require_valid_povm(p0, tol);
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "mixing probability must lie in (0, 1)");
  if (p_star.effects.front().rows() != p0.effects.front().rows())
    throw Error(ErrorCode::ShapeMismatch, "POVMs act on different dimensions");
  Povm out;
  for (std::size_t x = 0; x < p_star.size(); ++x) {
    out.effects.push_back((1.0 - eps) * p_star.effects[x]);
    out.labels.push_back("a:" + p_star.labels[x]);
  }
  for (std::size_t y = 0; y < p0.size(); ++y) {
    out.effects.push_back(eps * p0.effects[y]);
    out.labels.push_back("b:" + p0.labels[y]);
  }
  return out;
}

Povm random_povm(std::mt19937_64& rng, int outcomes, int dim) {
  if (outcomes < 1 || dim < 1) throw Error(ErrorCode::InvalidArgument, "random POVM needs positive sizes");
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<CMatrix> a;
  CMatrix s = CMatrix::Zero(dim, dim);
  for (int k = 0; k < outcomes; ++k) {
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
    a.push_back(v * v.adjoint());
    s += a.back();
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (s + s.adjoint()));
  const RVector inv_root = es.eigenvalues().cwiseSqrt().cwiseInverse();
  const CMatrix t = es.eigenvectors() * inv_root.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  Povm p;
  for (int k = 0; k < outcomes; ++k) {
    CMatrix e = t * a[static_cast<std::size_t>(k)] * t;
    p.effects.push_back(0.5 * (e + e.adjoint()));
    p.labels.push_back(std::to_string(k));
  }
  return p;
}

Povm random_qubit_pvm(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Vector3d u;
  do {
    u = Eigen::Vector3d(g(rng), g(rng), g(rng));
  } while (u.norm() < 1e-8);
  return bloch_pvm(u);
}

}  // namespace qnuis
