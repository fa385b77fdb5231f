#include "qnuis/bounds.hpp"

#include <cmath>
#include <sstream>

#include "qnuis/errors.hpp"

namespace qnuis {

namespace {

void require_shape(const RMatrix& a, Eigen::Index r, Eigen::Index c, const char* what) {
  if (a.rows() != r || a.cols() != c) {
    std::ostringstream os;
    os << what << " must be " << r << "x" << c << ", got " << a.rows() << "x" << a.cols();
    throw Error(ErrorCode::ShapeMismatch, os.str());
  }
  if (!a.allFinite()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " has non-finite entries");
}

void require_spd(const RMatrix& a, const char* what, const Tolerances& tol) {
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol.hermitian_input * std::max(1.0, a.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::NonHermitianInput, std::string(what) + " is not symmetric");
  if (!(min_eigenvalue(a) > 0.0)) throw Error(ErrorCode::NotPsd, std::string(what) + " is not positive definite");
}

double clamp_sqrt(double x) { return x > 0.0 ? std::sqrt(x) : 0.0; }

RMatrix direct_sum(const RMatrix& a, double eps, Eigen::Index k) {
  RMatrix w = RMatrix::Zero(a.rows() + k, a.cols() + k);
  w.topLeftCorner(a.rows(), a.cols()) = a;
  w.bottomRightCorner(k, k) = eps * RMatrix::Identity(k, k);
  return w;
}

void require_block_diagonal(const RMatrix& G_inv, int m, const Tolerances& tol) {
  const auto k = G_inv.rows() - m;
  const double off = G_inv.topRightCorner(m, k).cwiseAbs().maxCoeff();
  if (off > tol.block_diagonal) {
    std::ostringstream os;
    os << "interest/nuisance off-diagonal block has magnitude " << off << "; orthogonalize the model first";
    throw Error(ErrorCode::NotBlockDiagonal, os.str());
  }
}

}  // namespace

WeightMatrix WeightMatrix::make(const RMatrix& w, const Tolerances& tol) {
  if (w.rows() != w.cols() || w.rows() == 0) throw Error(ErrorCode::ShapeMismatch, "weight matrix must be square");
  if (!w.allFinite()) throw Error(ErrorCode::InvalidArgument, "weight matrix has non-finite entries");
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > tol.hermitian_input)
    throw Error(ErrorCode::NonHermitianInput, "weight matrix is not symmetric");
  const double lo = min_eigenvalue(w);
  if (lo < -tol.not_psd) throw Error(ErrorCode::NonPositiveWeight, "weight matrix is not positive semidefinite");
  return {0.5 * (w + w.transpose()), lo > tol.weight_strict};
}

double BoundResult::component(const std::string& name) const {
  for (const auto& [k, v] : components)
    if (k == name) return v;
  throw Error(ErrorCode::InvalidArgument, "bound has no component '" + name + "'");
}

double sld_cr_bound(const RMatrix& W, const RMatrix& G_inv) {
  require_shape(W, G_inv.rows(), G_inv.cols(), "weight matrix");
  return (W * G_inv).trace();
}

double nagaoka_bound(const RMatrix& W, const RMatrix& G_inv, const Tolerances& tol) {
  require_shape(W, 2, 2, "weight matrix");
  require_shape(G_inv, 2, 2, "inverse Fisher matrix");
  const WeightMatrix w = WeightMatrix::make(W, tol);
  if (!w.strict) throw Error(ErrorCode::NonPositiveWeight, "Nagaoka bound needs a positive definite weight");
  require_spd(G_inv, "inverse Fisher matrix", tol);
  const RMatrix p = w.W * G_inv;
  return p.trace() + 2.0 * clamp_sqrt(p.determinant());
}

double hgm_bound(const RMatrix& W, const RMatrix& G_inv, const Tolerances& tol) {
  require_shape(W, 3, 3, "weight matrix");
  require_shape(G_inv, 3, 3, "inverse Fisher matrix");
  const double f = fidelity(G_inv, W, tol);
  return f * f;
}

WeightLimitKind parse_weight_limit_kind(const std::string& s) {
  if (s == "nagaoka-1+1") return WeightLimitKind::Nagaoka11;
  if (s == "hgm-1+2") return WeightLimitKind::Hgm12;
  if (s == "hgm-2+1") return WeightLimitKind::Hgm21;
  throw Error(ErrorCode::InvalidArgument, "unknown weight-limit kind '" + s + "'");
}

std::string to_string(WeightLimitKind kind) {
  switch (kind) {
    case WeightLimitKind::Nagaoka11: return "nagaoka-1+1";
    case WeightLimitKind::Hgm12: return "hgm-1+2";
    case WeightLimitKind::Hgm21: return "hgm-2+1";
  }
  return "unknown";
}

WeightLimitResult weight_limit_bound(WeightLimitKind kind, const RMatrix& W_I, const RMatrix& G_inv,
                                     const Tolerances& tol) {
  Eigen::Index m = 1, n = 2;
  if (kind == WeightLimitKind::Hgm12) n = 3;
  if (kind == WeightLimitKind::Hgm21) m = 2, n = 3;
  require_shape(W_I, m, m, "interest weight matrix");
  require_shape(G_inv, n, n, "inverse Fisher matrix");
  const WeightMatrix w = WeightMatrix::make(W_I, tol);
  if (!w.strict) throw Error(ErrorCode::NonPositiveWeight, "interest weight must be positive definite");
  require_spd(G_inv, "inverse Fisher matrix", tol);

  auto parent = [&](double eps) {
    const RMatrix full = direct_sum(w.W, eps, n - m);
    return kind == WeightLimitKind::Nagaoka11 ? nagaoka_bound(full, G_inv, tol) : hgm_bound(full, G_inv, tol);
  };

  WeightLimitResult r;
  const RMatrix gII = G_inv.topLeftCorner(m, m);
  if (m == 1) {
    r.closed_form = w.W(0, 0) * gII(0, 0);
  } else {
    const RMatrix p = w.W * gII;
    r.closed_form = p.trace() + 2.0 * clamp_sqrt(p.determinant());
  }

  // Parent bounds expand in powers of sqrt(eps); Richardson in h = sqrt(eps).
  const double ratio = std::sqrt(10.0);
  std::vector<std::vector<double>> table;
  for (int k = 0; k <= 6; ++k) {
    const double eps = 1e-2 * std::pow(10.0, -k);
    r.epsilons.push_back(eps);
    r.ladder.push_back(parent(eps));
    std::vector<double> row{r.ladder.back()};
    for (int j = 1; j <= 2 && j <= k; ++j) {
      const double t = std::pow(ratio, j);
      row.push_back((t * row[static_cast<std::size_t>(j - 1)] - table.back()[static_cast<std::size_t>(j - 1)]) /
                    (t - 1.0));
    }
    table.push_back(row);
    if (k >= 2) r.extrapolants.push_back(row[2]);
  }
  r.value = r.extrapolants.back();
  const double prev = r.extrapolants[r.extrapolants.size() - 2];
  const double scale = std::max(1.0, std::abs(r.value));
  if (!(std::abs(r.value - prev) <= tol.limit_cauchy * scale)) {
    std::ostringstream os;
    os << "weight-limit sequence is not Cauchy: last extrapolants " << prev << " and " << r.value;
    throw Error(ErrorCode::NonConvergent, os.str());
  }
  if (kind == WeightLimitKind::Nagaoka11 && !(std::abs(r.value - r.closed_form) <= tol.limit_cauchy * scale)) {
    std::ostringstream os;
    os << "extrapolated limit " << r.value << " disagrees with the closed form " << r.closed_form;
    throw Error(ErrorCode::NonConvergent, os.str());
  }
  return r;
}

BoundResult nui_bound_11(const RMatrix& G_inv, double V_IN, double V_NN, const Tolerances& tol) {
  require_shape(G_inv, 2, 2, "inverse Fisher matrix");
  require_spd(G_inv, "inverse Fisher matrix", tol);
  if (!std::isfinite(V_IN) || !std::isfinite(V_NN)) throw Error(ErrorCode::InvalidArgument, "MSE entries must be finite");
  const double g11 = G_inv(0, 0), g12 = G_inv(0, 1), g22 = G_inv(1, 1);
  if (!(V_NN > g22 + tol.feasibility_margin)) {
    std::ostringstream os;
    os << "nuisance MSE " << V_NN << " must exceed the SLD floor g22=" << g22;
    throw Error(ErrorCode::NuisanceVarianceTooSmall, os.str());
  }
  const double det = G_inv.determinant();
  const double gap = V_NN - g22;
  const double tradeoff = (det + (V_IN - g12) * (V_IN - g12)) / gap;
  const double known = det / g22;  // 1 / G_11
  BoundResult r;
  r.value = g11 + tradeoff;
  r.components = {{"parent_bound", g11},
                  {"tradeoff", tradeoff},
                  {"symmetric_relaxation", g11 + det / gap},
                  {"known_nuisance_bound", known},
                  {"information_loss", r.value - known}};
  return r;
}

double tradeoff_det_check(const RMatrix& V_II, const RMatrix& G_II_sup) {
  require_shape(V_II, 2, 2, "MSE block");
  require_shape(G_II_sup, 2, 2, "inverse Fisher block");
  return (V_II - G_II_sup).determinant() - G_II_sup.determinant();
}

BoundResult nui_bound_12(double g11_sup, const RMatrix& G_NN_sup, const RMatrix& V_NN, const Tolerances& tol) {
  require_shape(G_NN_sup, 2, 2, "nuisance inverse Fisher block");
  require_shape(V_NN, 2, 2, "nuisance MSE block");
  if (!(g11_sup > 0.0) || !std::isfinite(g11_sup)) throw Error(ErrorCode::InvalidArgument, "g11 must be positive");
  require_spd(G_NN_sup, "nuisance inverse Fisher block", tol);
  const RMatrix gap = V_NN - G_NN_sup;
  if (!(min_eigenvalue(RMatrix(0.5 * (gap + gap.transpose()))) > tol.feasibility_margin))
    throw Error(ErrorCode::NuisanceVarianceTooSmall, "V_NN - G^NN must be positive definite");
  const double delta = std::sqrt(G_NN_sup.determinant() / gap.determinant());
  if (!(delta < 1.0)) {
    std::ostringstream os;
    os << "delta_N = " << delta << " is not below 1";
    throw Error(ErrorCode::DeltaOutOfRange, os.str());
  }
  BoundResult r;
  const double tradeoff = g11_sup * 2.0 * delta / (1.0 - delta);
  r.value = g11_sup + tradeoff;
  r.components = {{"parent_bound", g11_sup},
                  {"delta_N", delta},
                  {"tradeoff", tradeoff},
                  {"known_nuisance_bound", g11_sup},
                  {"information_loss", tradeoff}};
  return r;
}

BoundResult nui_bound_12(const RMatrix& G_inv, const RMatrix& V_NN, const Tolerances& tol) {
  require_shape(G_inv, 3, 3, "inverse Fisher matrix");
  require_block_diagonal(G_inv, 1, tol);
  return nui_bound_12(G_inv(0, 0), G_inv.bottomRightCorner(2, 2), V_NN, tol);
}

BoundResult nui_bound_21(const RMatrix& W_I, const RMatrix& G_II_sup, double g33_sup, double V_33,
                         const Tolerances& tol) {
  require_shape(W_I, 2, 2, "interest weight matrix");
  require_shape(G_II_sup, 2, 2, "interest inverse Fisher block");
  if (!(g33_sup > 0.0) || !std::isfinite(g33_sup)) throw Error(ErrorCode::InvalidArgument, "g33 must be positive");
  if (!std::isfinite(V_33)) throw Error(ErrorCode::InvalidArgument, "V_33 must be finite");
  if (!(V_33 > g33_sup + tol.feasibility_margin)) {
    std::ostringstream os;
    os << "nuisance MSE " << V_33 << " must exceed the SLD floor g33=" << g33_sup;
    throw Error(ErrorCode::NuisanceVarianceTooSmall, os.str());
  }
  const double cn = nagaoka_bound(W_I, G_II_sup, tol);
  const double loss = cn * g33_sup / (V_33 - g33_sup);
  BoundResult r;
  r.value = cn + loss;
  r.components = {{"parent_bound", cn}, {"tradeoff", loss}, {"known_nuisance_bound", cn}, {"information_loss", loss}};
  return r;
}

BoundResult nui_bound_21(const RMatrix& W_I, const RMatrix& G_inv, double V_33, const Tolerances& tol) {
  require_shape(G_inv, 3, 3, "inverse Fisher matrix");
  require_block_diagonal(G_inv, 2, tol);
  return nui_bound_21(W_I, G_inv.topLeftCorner(2, 2), G_inv(2, 2), V_33, tol);
}

EliminationResult classical_weight_elimination(const RMatrix& M, const RMatrix& W_I, const Tolerances& tol) {
  if (M.rows() != M.cols() || M.rows() < 2) throw Error(ErrorCode::ShapeMismatch, "M must be square with n >= 2");
  const auto n = M.rows();
  const auto m = W_I.rows();
  require_shape(W_I, m, m, "interest weight matrix");
  if (m < 1 || m >= n) throw Error(ErrorCode::ShapeMismatch, "interest weight size must lie in [1, n-1]");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > tol.hermitian_input * std::max(1.0, M.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::NonHermitianInput, "M is not symmetric");
  const WeightMatrix w = WeightMatrix::make(W_I, tol);
  if (!w.strict) throw Error(ErrorCode::NonPositiveWeight, "interest weight must be positive definite");

  const auto k = n - m;
  const RMatrix Msym = 0.5 * (M + M.transpose());
  const RMatrix MII = Msym.topLeftCorner(m, m), MIN = Msym.topRightCorner(m, k), MNI = Msym.bottomLeftCorner(k, m),
                MNN = Msym.bottomRightCorner(k, k);
  if (!(condition_number(MNN) <= tol.singular_condition))
    throw Error(ErrorCode::SingularNuisanceBlock, "nuisance block of M is singular or not positive definite");

  const auto ldlt = MNN.ldlt();
  const RMatrix schur = MII - MIN * ldlt.solve(MNI);
  EliminationResult r;
  const RMatrix W_NI = -ldlt.solve(MNI) * w.W;
  r.W_IN = W_NI.transpose();
  r.W_N = W_NI * w.W.ldlt().solve(r.W_IN);
  r.W_N = 0.5 * (r.W_N + r.W_N.transpose()).eval();

  RMatrix full(n, n);
  full.topLeftCorner(m, m) = w.W;
  full.topRightCorner(m, k) = r.W_IN;
  full.bottomLeftCorner(k, m) = W_NI;
  full.bottomRightCorner(k, k) = r.W_N;

  r.bound.value = (w.W * schur).trace();
  r.direct = (full * Msym).trace();
  const double scale = std::max(1.0, std::abs(r.bound.value));
  if (!(std::abs(r.direct - r.bound.value) <= 1e-8 * scale)) {
    std::ostringstream os;
    os << "direct evaluation " << r.direct << " disagrees with the Schur value " << r.bound.value;
    throw Error(ErrorCode::NonConvergent, os.str());
  }
  r.bound.optimal_weights = full;
  r.bound.components = {{"parent_bound", (w.W * MII).trace()},
                        {"direct_evaluation", r.direct},
                        {"optimal_weight_min_eigenvalue", min_eigenvalue(full)}};
  return r;
}

RMatrix classical_tradeoff_residual(const RMatrix& V, const RMatrix& J, int m, const Tolerances& tol) {
  if (V.rows() != V.cols() || J.rows() != J.cols() || V.rows() != J.rows())
    throw Error(ErrorCode::ShapeMismatch, "V and J must be square and of equal size");
  const auto n = J.rows();
  if (m < 1 || m >= n) throw Error(ErrorCode::ShapeMismatch, "interest count must lie in [1, n-1]");
  if (!(condition_number(J) <= tol.singular_condition)) throw Error(ErrorCode::SingularFisher, "J is singular");
  const auto k = n - m;
  const RMatrix Jinv = J.ldlt().solve(RMatrix::Identity(n, n));
  const RMatrix D = V - Jinv;
  const RMatrix DNN = 0.5 * (D.bottomRightCorner(k, k) + D.bottomRightCorner(k, k).transpose());
  if (!(condition_number(DNN) <= tol.singular_condition))
    throw Error(ErrorCode::NuisanceVarianceTooSmall, "V_NN - J^NN must be positive definite");
  const RMatrix res = D.topLeftCorner(m, m) - D.topRightCorner(m, k) * DNN.ldlt().solve(D.bottomLeftCorner(k, m));
  return 0.5 * (res + res.transpose());
}

}  // namespace qnuis
