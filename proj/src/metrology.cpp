#include "qnuis/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "qnuis/errors.hpp"

namespace qnuis {

namespace {

using Jac3 = Eigen::Matrix<double, 3, Eigen::Dynamic>;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// phi1(w) = (1 - e^-w) / w
Complex phi1(Complex w) {
  if (std::abs(w) < 0.5) {
    Complex sum = 0.0, term = 1.0;  // (-w)^k / (k+1)!
    for (int k = 0; k < 25; ++k) {
      sum += term;
      term *= -w / static_cast<double>(k + 2);
    }
    return sum;
  }
  return (1.0 - std::exp(-w)) / w;
}

// phi2(w) = (w - 1 + e^-w) / w^2, so that int_0^t int_0^t' e^{-z u} du dt' = t^2 phi2(z t).
Complex phi2(Complex w) {
  if (std::abs(w) < 0.5) {
    Complex sum = 0.0, term = 0.5;  // (-w)^k / (k+2)!
    for (int k = 0; k < 25; ++k) {
      sum += term;
      term *= -w / static_cast<double>(k + 3);
    }
    return sum;
  }
  return (w - 1.0 + std::exp(-w)) / (w * w);
}

// d phi2 / dw = (2 - w - (2 + w) e^-w) / w^3
Complex phi2_prime(Complex w) {
  if (std::abs(w) < 0.5) {
    // sum_{k>=1} k (-1)^k w^{k-1} / (k+2)!
    Complex sum = 0.0, power = 1.0;  // w^{k-1}
    double fact = 6.0;               // (k+2)!
    for (int k = 1; k < 26; ++k) {
      sum += (k % 2 ? -1.0 : 1.0) * static_cast<double>(k) * power / fact;
      power *= w;
      fact *= static_cast<double>(k + 3);
    }
    return sum;
  }
  return (2.0 - w - (2.0 + w) * std::exp(-w)) / (w * w * w);
}

struct DecayGradient {
  DecayState state;
  RVector dGamma1, dGamma3, dOmega;
};

DecayGradient decay_with_gradient(const NoiseModelSpec& spec, double t) {
  const double w = spec.omega, b2 = spec.b2, g = spec.gamma_corr;
  DecayGradient d;
  if (spec.variant == 3) {
    const double gamma = b2 / g;
    d.state = {gamma * t, 2.0 * gamma * t, w * t};
    d.dGamma1 = RVector::Zero(2);
    d.dGamma3 = RVector::Zero(2);
    d.dOmega = RVector::Zero(2);
    d.dGamma1(1) = t;
    d.dGamma3(1) = 2.0 * t;
    d.dOmega(0) = t;
    return d;
  }
  d.dGamma1 = RVector::Zero(3);
  d.dGamma3 = RVector::Zero(3);
  d.dOmega = RVector::Zero(3);
  if (spec.variant == 2) {
    const double D = g * g + w * w;
    const double g1 = b2 * g / D, g3 = b2 / g, dw = b2 * w / D;
    d.state = {(g1 + g3) * t, 2.0 * g3 * t, (w + dw) * t};
    const double dg1_dw = -2.0 * b2 * g * w / (D * D), dg1_db = g / D, dg1_dg = b2 * (w * w - g * g) / (D * D);
    const double dg3_db = 1.0 / g, dg3_dg = -b2 / (g * g);
    const double ddw_dw = b2 * (g * g - w * w) / (D * D), ddw_db = w / D, ddw_dg = -2.0 * b2 * w * g / (D * D);
    d.dGamma1 << dg1_dw * t, (dg1_db + dg3_db) * t, (dg1_dg + dg3_dg) * t;
    d.dGamma3 << 0.0, 2.0 * dg3_db * t, 2.0 * dg3_dg * t;
    d.dOmega << (1.0 + ddw_dw) * t, ddw_db * t, ddw_dg * t;
    return d;
  }
  const Complex z(g, -w);
  const Complex Pz = t * t * phi2(z * t), dPz = t * t * t * phi2_prime(z * t);
  const double Pg = t * t * phi2(Complex(g * t)).real(), dPg = t * t * t * phi2_prime(Complex(g * t)).real();
  d.state = {b2 * (Pz.real() + Pg), 2.0 * b2 * Pg, w * t + b2 * Pz.imag()};
  // d/dGamma F(z) = F'(z), d/domega F(z) = -i F'(z)
  d.dGamma1 << b2 * dPz.imag(), Pz.real() + Pg, b2 * (dPz.real() + dPg);
  d.dGamma3 << 0.0, 2.0 * Pg, 2.0 * b2 * dPg;
  d.dOmega << t - b2 * dPz.real(), Pz.imag(), b2 * dPz.imag();
  return d;
}

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "time must be finite and nonnegative");
}

}  // namespace

void NoiseModelSpec::validate() const {
  std::ostringstream os;
  if (variant < 1 || variant > 3) os << "variant must be 1, 2 or 3; ";
  if (!(omega > 0.0) || !std::isfinite(omega)) os << "omega must be positive; ";
  if (!(b2 >= 0.0) || !std::isfinite(b2)) os << "b2 must be nonnegative; ";
  if (!(gamma_corr > 0.0) || !std::isfinite(gamma_corr)) os << "Gamma must be positive; ";
  if (!s0.allFinite() || s0.norm() > 1.0 + 1e-12) os << "initial Bloch vector must satisfy |s0| <= 1; ";
  const std::string msg = os.str();
  if (!msg.empty()) throw Error(ErrorCode::InvalidSpec, msg.substr(0, msg.size() - 2));
}

std::vector<std::string> noise_preset_names() { return {"fig1a", "fig1b", "fig1c"}; }

NoiseModelSpec noise_preset(const std::string& name, int variant) {
  NoiseModelSpec s;
  s.variant = variant;
  s.s0 = Eigen::Vector3d(std::sqrt(0.91), 0.0, 0.3);
  if (name == "fig1a") {
    s.omega = 1e3, s.b2 = 1e2, s.gamma_corr = 10.0;
  } else if (name == "fig1b") {
    s.omega = 1e2, s.b2 = 1e2, s.gamma_corr = 10.0;
  } else if (name == "fig1c") {
    s.omega = 1e2, s.b2 = 1e2, s.gamma_corr = 1.0;
  } else {
    throw Error(ErrorCode::InvalidSpec, "unknown preset '" + name + "'");
  }
  s.validate();
  return s;
}

Kernels kernels(const NoiseModelSpec& spec, double t) {
  spec.validate();
  require_time(t);
  const double w = spec.omega, b2 = spec.b2, g = spec.gamma_corr;
  if (spec.variant == 3) return {0.0, 0.0, b2 / g};
  if (spec.variant == 2) {
    const double D = g * g + w * w;
    return {b2 * w / D, b2 * g / D, b2 / g};
  }
  const Complex I = t * phi1(Complex(g, -w) * t);
  return {b2 * I.imag(), b2 * I.real(), b2 * t * phi1(Complex(g * t)).real()};
}

DecayState decay_state(const NoiseModelSpec& spec, double t) {
  spec.validate();
  require_time(t);
  return decay_with_gradient(spec, t).state;
}

Eigen::Vector3d evolve_bloch(const NoiseModelSpec& spec, double t) {
  const DecayState d = decay_state(spec, t);
  const double c = std::cos(d.Omega), s = std::sin(d.Omega);
  const double e1 = std::exp(-d.Gamma1), e3 = std::exp(-d.Gamma3);
  const auto& v = spec.s0;
  return {e1 * (c * v(0) + s * v(1)), e1 * (-s * v(0) + c * v(1)), e3 * v(2)};
}

RVector metrology_parameters(const NoiseModelSpec& spec) {
  if (spec.variant == 3) {
    RVector p(2);
    p << spec.omega, spec.b2 / spec.gamma_corr;
    return p;
  }
  RVector p(3);
  p << spec.omega, spec.b2, spec.gamma_corr;
  return p;
}

NoiseModelSpec with_parameters(const NoiseModelSpec& spec, const RVector& params) {
  NoiseModelSpec s = spec;
  if (spec.variant == 3) {
    if (params.size() != 2) throw Error(ErrorCode::ShapeMismatch, "variant 3 has two parameters");
    s.omega = params(0);
    s.b2 = params(1) * spec.gamma_corr;
  } else {
    if (params.size() != 3) throw Error(ErrorCode::ShapeMismatch, "variants 1 and 2 have three parameters");
    s.omega = params(0);
    s.b2 = params(1);
    s.gamma_corr = params(2);
  }
  return s;
}

Jac3 bloch_derivatives(const NoiseModelSpec& spec, double t) {
  spec.validate();
  require_time(t);
  const DecayGradient d = decay_with_gradient(spec, t);
  const double c = std::cos(d.state.Omega), s = std::sin(d.state.Omega);
  const double e1 = std::exp(-d.state.Gamma1), e3 = std::exp(-d.state.Gamma3);
  const auto& v = spec.s0;
  const Eigen::Vector2d planar(e1 * (c * v(0) + s * v(1)), e1 * (-s * v(0) + c * v(1)));
  const Eigen::Vector2d turned(e1 * (-s * v(0) + c * v(1)), e1 * (-c * v(0) - s * v(1)));
  Jac3 out(3, d.dOmega.size());
  for (Eigen::Index p = 0; p < d.dOmega.size(); ++p) {
    out.col(p).head<2>() = -d.dGamma1(p) * planar + d.dOmega(p) * turned;
    out(2, p) = -d.dGamma3(p) * e3 * v(2);
  }
  return out;
}

Jac3 bloch_derivatives_fd(const NoiseModelSpec& spec, double t, double rel_step) {
  const RVector p = metrology_parameters(spec);
  Jac3 out(3, p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    // Steps scale with the parameter and with 1/t, the scale of the e^{-zt} terms.
    const double scale = t > 0.0 ? std::min(std::abs(p(i)), 1.0 / t) : std::abs(p(i));
    double h = rel_step * std::max(scale, 1e-300);
    auto state_at = [&](double k) {
      RVector q = p;
      q(i) += k * h;
      return decay_with_gradient(with_parameters(spec, q), t).state;
    };
    // Keep the change of the exponents per step small so heavy damping stays resolved.
    const DecayState d0 = state_at(0.0), d1 = state_at(1.0);
    const double change = std::max({std::abs(d1.Gamma1 - d0.Gamma1), std::abs(d1.Gamma3 - d0.Gamma3),
                                    std::abs(d1.Omega - d0.Omega)});
    if (change > 1e-2) h *= 1e-2 / change;
    auto at = [&](double k) {
      NoiseModelSpec s = spec;
      const DecayState d = state_at(k);
      const double c = std::cos(d.Omega), sn = std::sin(d.Omega);
      const double e1 = std::exp(-d.Gamma1), e3 = std::exp(-d.Gamma3);
      const auto& v = s.s0;
      return Eigen::Vector3d(e1 * (c * v(0) + sn * v(1)), e1 * (-sn * v(0) + c * v(1)), e3 * v(2));
    };
    out.col(i) = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
  }
  return out;
}

RMatrix metrology_fisher(const NoiseModelSpec& spec, double t) {
  const Eigen::Vector3d s = evolve_bloch(spec, t);
  const Jac3 ds = bloch_derivatives(spec, t);
  const RVector proj = ds.transpose() * s;
  return ds.transpose() * ds + proj * proj.transpose() / (1.0 - s.squaredNorm());
}

std::string to_string(PointStatus s) {
  switch (s) {
    case PointStatus::Ok: return "ok";
    case PointStatus::RankDeficientState: return "RankDeficientState";
    case PointStatus::SingularFisher: return "SingularFisher";
  }
  return "unknown";
}

FisherPoint fisher_point(const NoiseModelSpec& spec, double t, const Tolerances& tol) {
  spec.validate();
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "Fisher time points must be positive");
  const auto& v = spec.s0;
  const double rho2 = v(0) * v(0) + v(1) * v(1);
  if (!(rho2 > 0.0)) throw Error(ErrorCode::InvalidSpec, "initial Bloch vector needs s1^2 + s2^2 > 0");
  const double rho = std::sqrt(rho2);

  FisherPoint pt;
  pt.t = t;
  const DecayGradient d = decay_with_gradient(spec, t);
  const double G1 = d.state.Gamma1, G3 = d.state.Gamma3;

  // 1 - |s|^2 without cancellation.
  const double purity_gap =
      (1.0 - spec.s0.squaredNorm()) - rho2 * std::expm1(-2.0 * G1) - v(2) * v(2) * std::expm1(-2.0 * G3);
  const double s_norm = std::sqrt(std::max(0.0, 1.0 - purity_gap));
  if (!(purity_gap / (1.0 + s_norm) / 2.0 > tol.rank_floor)) {
    pt.status = PointStatus::RankDeficientState;
    pt.g11 = pt.g11_partial = pt.log_g11 = pt.log_g11_partial = nan;
    return pt;
  }

  // Everything below is scaled by e^{Gamma1}: G = e^{-2 Gamma1} Gt.
  const double axial = std::exp(G1 - G3);  // <= 1
  const double kappa = std::exp(-2.0 * G1) / purity_gap;
  const RVector rad = -rho * d.dGamma1;
  const RVector tan = rho * d.dOmega;
  const RVector zr = -v(2) * axial * d.dGamma3;
  const RVector srow = std::sqrt(kappa) * (rho * rad + v(2) * axial * zr);
  const RMatrix Gt = rad * rad.transpose() + tan * tan.transpose() + zr * zr.transpose() + srow * srow.transpose();

  pt.log_g11 = -2.0 * G1 + std::log(Gt(0, 0));
  pt.g11 = std::exp(pt.log_g11);
  const auto n = Gt.rows();

  auto generic_partial = [&]() -> std::optional<double> {
    RVector scale = Gt.diagonal().cwiseSqrt();
    if (!(scale.minCoeff() > 0.0)) return std::nullopt;
    const RMatrix C = scale.cwiseInverse().asDiagonal() * Gt * scale.cwiseInverse().asDiagonal();
    if (!(condition_number(C) <= tol.singular_condition)) return std::nullopt;
    const RMatrix CNN = C.bottomRightCorner(n - 1, n - 1);
    const RVector c = C.col(0).tail(n - 1);
    const double frac = 1.0 - c.dot(CNN.ldlt().solve(c));
    if (!(frac > 0.0)) return std::nullopt;
    return -2.0 * G1 + std::log(Gt(0, 0)) + std::log(frac);
  };

  std::optional<double> log_partial;
  if (n == 3) {
    // The planar rows fix the nuisance shift that cancels the omega score
    // exactly; the remaining information sits in the axial and purity rows.
    Eigen::Matrix2d B;
    B << rad(1), rad(2), tan(1), tan(2);
    Eigen::Vector2d colnorm(B.col(0).norm(), B.col(1).norm());
    bool planar_ok = colnorm.minCoeff() > 0.0;
    if (planar_ok) {
      const Eigen::Matrix2d Bs = B * colnorm.cwiseInverse().asDiagonal();
      Eigen::JacobiSVD<Eigen::Matrix2d> svd(Bs);
      planar_ok = svd.singularValues()(1) > 0.0 &&
                  svd.singularValues()(0) / svd.singularValues()(1) <= tol.singular_condition;
    }
    if (planar_ok) {
      const Eigen::Vector2d x0 = -B.partialPivLu().solve(Eigen::Vector2d(rad(0), tan(0)));
      const double z_hat = -v(2) * (d.dGamma3(1) * x0(0) + d.dGamma3(2) * x0(1));
      const Eigen::Vector2d s_hat(z_hat, std::sqrt(kappa) * v(2) * axial * z_hat);
      Eigen::Matrix2d SN;
      SN << zr(1), zr(2), srow(1), srow(2);
      const Eigen::Matrix2d BtB = B.transpose() * B;
      const Eigen::Matrix2d M = SN * BtB.ldlt().solve(SN.transpose());
      const double q = s_hat.dot((Eigen::Matrix2d::Identity() + M).ldlt().solve(s_hat));
      if (q > 0.0 && std::isfinite(q)) log_partial = -2.0 * G3 + std::log(q);
    } else {
      log_partial = generic_partial();
    }
  } else {
    log_partial = generic_partial();
  }

  if (log_partial) {
    pt.log_g11_partial = *log_partial;
    pt.g11_partial = std::exp(pt.log_g11_partial);
  } else {
    pt.status = PointStatus::SingularFisher;
    pt.g11_partial = pt.log_g11_partial = nan;
  }
  return pt;
}

FisherTimeSeries fisher_time_series(const NoiseModelSpec& spec, const std::vector<double>& times,
                                    const Tolerances& tol) {
  spec.validate();
  FisherTimeSeries out;
  out.variant = spec.variant;
  out.times = times;
  for (double t : times) {
    const FisherPoint p = fisher_point(spec, t, tol);
    out.points.push_back(p);
    out.g11.push_back(p.g11);
    out.g11_partial.push_back(p.g11_partial);
    out.g11_normalized.push_back(std::exp(p.log_g11 - 2.0 * std::log(t)));
    out.g11_partial_normalized.push_back(std::exp(p.log_g11_partial - 2.0 * std::log(t)));
  }
  return out;
}

std::vector<double> time_grid(double tmin, double tmax, int count, Spacing spacing) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "time grid needs at least one point");
  if (!(tmin > 0.0) || !std::isfinite(tmax) || !(tmax >= tmin))
    throw Error(ErrorCode::InvalidArgument, "time grid needs 0 < tmin <= tmax");
  std::vector<double> ts;
  if (count == 1) return {tmin};
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / (count - 1);
    ts.push_back(spacing == Spacing::Log ? tmin * std::pow(tmax / tmin, f) : tmin + (tmax - tmin) * f);
  }
  ts.back() = tmax;
  return ts;
}

std::vector<double> default_time_grid(const NoiseModelSpec& spec) {
  return time_grid(1e-3, 30.0 / spec.gamma_corr, 200, Spacing::Log);
}

}  // namespace qnuis
