#include "qnuis/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>

#include "qnuis/errors.hpp"

namespace qnuis {

namespace {

constexpr double pi = std::numbers::pi;
using Small = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using Jac3 = Eigen::Matrix<double, 3, Eigen::Dynamic>;

Eigen::Vector3d direction(double polar, double azimuth) {
  return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)};
}

bool improves(double candidate, double incumbent) {
  if (!std::isfinite(incumbent)) return std::isfinite(candidate);
  return candidate < incumbent - 1e-12 * std::max(1.0, std::abs(incumbent));
}

// Evaluates Tr(W_I J^{II}) for qubit effects at a fixed state.
class Objective {
 public:
  Objective(Eigen::Vector3d s, Jac3 ds, RMatrix w, int m, const Tolerances& tol)
      : s_(std::move(s)), ds_(std::move(ds)), w_(std::move(w)), n_(static_cast<int>(ds_.cols())), m_(m), tol_(tol) {}

  std::optional<double> operator()(const std::vector<BlochEffect>& effects) {
    ++evaluated;
    Small J = Small::Zero(n_, n_);
    SmallVec g(n_);
    for (const auto& e : effects) {
      const double p = e.a + e.r.dot(s_);
      if (p < tol_.probability_floor) continue;
      g = ds_.transpose() * e.r;
      J.noalias() += g * g.transpose() / p;
    }
    Small partial;
    if (m_ == n_) {
      partial = J;
    } else {
      const int k = n_ - m_;
      Eigen::SelfAdjointEigenSolver<Small> es(Small(J.bottomRightCorner(k, k)));
      const double cutoff = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
      SmallVec inv = es.eigenvalues().unaryExpr([cutoff](double v) { return v > cutoff ? 1.0 / v : 0.0; });
      const Small pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
      partial = J.topLeftCorner(m_, m_) - J.topRightCorner(m_, k) * pinv * J.bottomLeftCorner(k, m_);
      partial = 0.5 * (partial + partial.transpose()).eval();
    }
    Eigen::SelfAdjointEigenSolver<Small> pe(partial);
    if (pe.eigenvalues().minCoeff() < tol_.score_singular) {
      ++skipped;
      return std::nullopt;
    }
    const SmallVec inv = pe.eigenvalues().cwiseInverse();
    const Small partial_inv = pe.eigenvectors() * inv.asDiagonal() * pe.eigenvectors().transpose();
    double v = 0.0;
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) v += w_(i, j) * partial_inv(j, i);
    return v;
  }

  long evaluated = 0;
  long skipped = 0;

 private:
  Eigen::Vector3d s_;
  Jac3 ds_;
  RMatrix w_;
  int n_;
  int m_;
  const Tolerances& tol_;
};

std::vector<BlochEffect> pvm_effects(const Eigen::Vector3d& u, double weight = 1.0) {
  return {{0.5 * weight, -0.5 * weight * u}, {0.5 * weight, 0.5 * weight * u}};
}

struct Incumbent {
  double value = std::numeric_limits<double>::infinity();
  std::vector<BlochEffect> effects;
  bool found() const { return std::isfinite(value); }
};

void offer(Incumbent& inc, std::optional<double> v, const std::vector<BlochEffect>& effects) {
  if (v && improves(*v, inc.value)) {
    inc.value = *v;
    inc.effects = effects;
  }
}

// ---- PVM grid family ----
struct PvmSearch {
  Incumbent best;
  double polar = 0.0, azimuth = 0.0;

  void offer_at(Objective& f, double th, double ph) {
    const auto eff = pvm_effects(direction(th, ph));
    const double before = best.value;
    offer(best, f(eff), eff);
    if (best.value != before) {
      polar = th;
      azimuth = ph;
    }
  }

  void initial(Objective& f, int density) {
    for (int i = 0; i <= density; ++i) {
      const double th = i * pi / density;
      const int az_count = (i == 0 || i == density) ? 1 : 2 * density;
      for (int k = 0; k < az_count; ++k) offer_at(f, th, k * pi / density);
    }
  }

  void refine(Objective& f, int density, int round) {
    if (!best.found()) return;
    const double step = (pi / density) / std::ldexp(1.0, round);
    const double th0 = polar, ph0 = azimuth;
    for (int i = -4; i <= 4; ++i)
      for (int k = -4; k <= 4; ++k)
        if (i != 0 || k != 0) offer_at(f, th0 + i * step, ph0 + k * step);
  }
};

// ---- mixtures of two PVMs ----
struct MixtureSearch {
  Incumbent best;
  std::array<double, 5> params{};  // polar_u, azimuth_u, polar_v, azimuth_v, weight on u

  static std::vector<BlochEffect> effects(const std::array<double, 5>& q) {
    auto e = pvm_effects(direction(q[0], q[1]), q[4]);
    const auto b = pvm_effects(direction(q[2], q[3]), 1.0 - q[4]);
    e.insert(e.end(), b.begin(), b.end());
    return e;
  }

  void offer_at(Objective& f, const std::array<double, 5>& q) {
    const auto eff = effects(q);
    const double before = best.value;
    offer(best, f(eff), eff);
    if (best.value != before) params = q;
  }

  void initial(Objective& f, int density, const std::vector<double>& weights) {
    std::vector<std::pair<double, double>> dirs;
    dirs.emplace_back(0.0, 0.0);
    for (int i = 1; i <= density / 2; ++i)
      for (int k = 0; k < 2 * density; ++k) dirs.emplace_back(i * pi / density, k * pi / density);
    for (std::size_t a = 0; a < dirs.size(); ++a)
      for (std::size_t b = a + 1; b < dirs.size(); ++b)
        for (double w : weights)
          offer_at(f, {dirs[a].first, dirs[a].second, dirs[b].first, dirs[b].second, w});
  }

  void refine(Objective& f, int density, int round) {
    if (!best.found()) return;
    const double angle_step = (pi / density) / std::ldexp(1.0, round);
    const double weight_step = 0.05 / std::ldexp(1.0, round);
    for (int sweep = 0; sweep < 50; ++sweep) {
      const double start = best.value;
      for (std::size_t c = 0; c < params.size(); ++c) {
        const double step = c == 4 ? weight_step : angle_step;
        for (double sign : {-1.0, 1.0}) {
          auto q = params;
          q[c] += sign * step;
          if (c == 4) q[c] = std::clamp(q[c], 1e-6, 1.0 - 1e-6);
          offer_at(f, q);
        }
      }
      if (!improves(best.value, start)) break;
    }
  }
};

// ---- random 4-outcome POVMs ----
struct RandomSearch {
  Incumbent best;
  std::array<Eigen::Vector2cd, 4> vectors{};

  static std::vector<BlochEffect> effects(const std::array<Eigen::Vector2cd, 4>& v) {
    CMatrix s = CMatrix::Zero(2, 2);
    std::array<CMatrix, 4> a;
    for (std::size_t k = 0; k < 4; ++k) {
      a[k] = v[k] * v[k].adjoint();
      s += a[k];
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (s + s.adjoint()));
    const RVector inv_root = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    const CMatrix t = es.eigenvectors() * inv_root.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    std::vector<BlochEffect> out;
    for (std::size_t k = 0; k < 4; ++k) {
      const CMatrix e = t * a[k] * t;
      out.push_back({0.5 * e.trace().real(), 0.5 * pauli::components(0.5 * (e + e.adjoint()))});
    }
    return out;
  }

  static std::optional<std::vector<BlochEffect>> safe_effects(const std::array<Eigen::Vector2cd, 4>& v) {
    Eigen::Matrix2cd s = Eigen::Matrix2cd::Zero();
    for (const auto& x : v) s += x * x.adjoint();
    if (std::abs(s.determinant()) < 1e-12) return std::nullopt;
    return effects(v);
  }

  void offer_at(Objective& f, const std::array<Eigen::Vector2cd, 4>& v) {
    const auto eff = safe_effects(v);
    if (!eff) return;
    const double before = best.value;
    offer(best, f(*eff), *eff);
    if (best.value != before) vectors = v;
  }

  void initial(Objective& f, std::mt19937_64& rng, int count) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (int c = 0; c < count; ++c) {
      std::array<Eigen::Vector2cd, 4> v;
      for (auto& x : v) x = Eigen::Vector2cd(Complex(g(rng), g(rng)), Complex(g(rng), g(rng)));
      offer_at(f, v);
    }
  }

  void refine(Objective& f, std::mt19937_64& rng, int round, int count) {
    if (!best.found()) return;
    std::normal_distribution<double> g(0.0, 0.3 / std::ldexp(1.0, round));
    const auto base = vectors;
    for (int c = 0; c < count; ++c) {
      auto v = base;
      for (auto& x : v) x += Eigen::Vector2cd(Complex(g(rng), g(rng)), Complex(g(rng), g(rng)));
      offer_at(f, v);
    }
  }
};

}  // namespace

void OracleConfig::validate() const {
  if (grid_density < 8) throw Error(ErrorCode::InvalidArgument, "grid_density must be at least 8");
  if (refinement_rounds < 0) throw Error(ErrorCode::InvalidArgument, "refinement_rounds must be nonnegative");
  if (!use_pvm_grid && !use_mixtures && !use_random)
    throw Error(ErrorCode::InvalidArgument, "no oracle candidate family selected");
  if (use_mixtures) {
    if (mixture_grid_density < 2) throw Error(ErrorCode::InvalidArgument, "mixture_grid_density must be at least 2");
    if (mixture_weights.empty()) throw Error(ErrorCode::InvalidArgument, "mixture weights are empty");
    for (double w : mixture_weights)
      if (!(w > 0.0 && w < 1.0)) throw Error(ErrorCode::InvalidArgument, "mixture weights must lie in (0, 1)");
  }
  if (use_random && random_candidates < 1) throw Error(ErrorCode::InvalidArgument, "random_candidates must be positive");
}

Povm povm_from_bloch(const std::vector<BlochEffect>& effects) {
  Povm p;
  for (std::size_t k = 0; k < effects.size(); ++k) {
    p.effects.push_back(effects[k].a * pauli::identity() + pauli::dot(effects[k].r));
    p.labels.push_back(std::to_string(k));
  }
  return p;
}

OracleResult oracle_minimize(const ParametricModel& model, const RVector& theta, const RMatrix& W_I,
                             const OracleConfig& cfg, const Tolerances& tol) {
  cfg.validate();
  if (model.dim != 2) throw Error(ErrorCode::InvalidArgument, "the oracle supports qubit models only");
  if (W_I.rows() != model.m || W_I.cols() != model.m)
    throw Error(ErrorCode::ShapeMismatch, "weight matrix must be m x m");
  if ((W_I - W_I.transpose()).cwiseAbs().maxCoeff() > 1e-12 || min_eigenvalue(W_I) < -tol.not_psd)
    throw Error(ErrorCode::NonPositiveWeight, "weight matrix must be symmetric positive semidefinite");

  const Eigen::Vector3d s = bloch_vector(model, theta, tol);
  if (1.0 - s.norm() <= 2.0 * tol.rank_floor) throw Error(ErrorCode::RankDeficientState, "state is not full rank");
  Objective f(s, bloch_jacobian(model, theta, tol), W_I, model.m, tol);
  std::mt19937_64 rng(cfg.seed);

  PvmSearch pvm;
  MixtureSearch mix;
  RandomSearch rnd;
  const int random_refine = std::max(50, cfg.random_candidates / 10);

  OracleResult res;
  auto global = [&]() {
    double v = std::numeric_limits<double>::infinity();
    if (pvm.best.found()) v = pvm.best.value;
    if (mix.best.found() && improves(mix.best.value, v)) v = mix.best.value;
    if (rnd.best.found() && improves(rnd.best.value, v)) v = rnd.best.value;
    return v;
  };

  if (cfg.use_pvm_grid) pvm.initial(f, cfg.grid_density);
  if (cfg.use_mixtures) mix.initial(f, cfg.mixture_grid_density, cfg.mixture_weights);
  if (cfg.use_random) rnd.initial(f, rng, cfg.random_candidates);
  res.trace.push_back(global());
  for (int r = 1; r <= cfg.refinement_rounds; ++r) {
    if (cfg.use_pvm_grid) pvm.refine(f, cfg.grid_density, r);
    if (cfg.use_mixtures) mix.refine(f, cfg.mixture_grid_density, r);
    if (cfg.use_random) rnd.refine(f, rng, r, random_refine);
    res.trace.push_back(global());
  }

  res.evaluated = f.evaluated;
  res.skipped = f.skipped;
  const double best = global();
  if (!std::isfinite(best)) throw Error(ErrorCode::EmptyFeasibleSet, "every oracle candidate was skipped");
  res.value = best;
  if (pvm.best.found() && pvm.best.value == best) {
    res.family = "pvm-grid";
    res.effects = pvm.best.effects;
  } else if (mix.best.found() && mix.best.value == best) {
    res.family = "mixtures";
    res.effects = mix.best.effects;
  } else {
    res.family = "random-4-outcome";
    res.effects = rnd.best.effects;
  }
  res.povm = povm_from_bloch(res.effects);
  return res;
}

}  // namespace qnuis
