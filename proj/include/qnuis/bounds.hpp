#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qnuis/linalg.hpp"

namespace qnuis {

/// Symmetric PSD weight matrix; `strict` when positive definite.
struct WeightMatrix {
  RMatrix W;
  bool strict = false;

  static WeightMatrix make(const RMatrix& w, const Tolerances& tol = default_tolerances());
};

struct BoundResult {
  double value = 0.0;
  std::optional<RMatrix> optimal_weights;
  std::vector<std::pair<std::string, double>> components;

  /// Throws InvalidArgument for an unknown component name.
  double component(const std::string& name) const;
};

/// Tr(W G^-1)
double sld_cr_bound(const RMatrix& W, const RMatrix& G_inv);

/// Tr(W G^-1) + 2 sqrt(det(W G^-1)) for a strict 2x2 weight.
double nagaoka_bound(const RMatrix& W, const RMatrix& G_inv, const Tolerances& tol = default_tolerances());

/// F(G^-1, W)^2 for 3x3 PSD arguments.
double hgm_bound(const RMatrix& W, const RMatrix& G_inv, const Tolerances& tol = default_tolerances());

enum class WeightLimitKind { Nagaoka11, Hgm12, Hgm21 };

WeightLimitKind parse_weight_limit_kind(const std::string& s);
std::string to_string(WeightLimitKind kind);

struct WeightLimitResult {
  double value = 0.0;        // extrapolated limit
  double closed_form = 0.0;  // the analytic limit of the parent bound
  std::vector<double> epsilons;
  std::vector<double> ladder;        // parent bound at W_I + eps I_N
  std::vector<double> extrapolants;  // last Richardson column
};

/// Evaluates the parent bound at W_I (+) eps I on eps = 1e-2 ... 1e-8 and
/// Richardson-extrapolates in sqrt(eps). NonConvergent if the last two
/// extrapolants differ by more than limit_cauchy (relative).
WeightLimitResult weight_limit_bound(WeightLimitKind kind, const RMatrix& W_I, const RMatrix& G_inv,
                                     const Tolerances& tol = default_tolerances());

/// 1+1 qubit bound g^11 + (det G^-1 + (V_IN - g^12)^2) / (V_NN - g^22).
BoundResult nui_bound_11(const RMatrix& G_inv, double V_IN, double V_NN, const Tolerances& tol = default_tolerances());

/// det(V_II - G^II) - det G^II
double tradeoff_det_check(const RMatrix& V_II, const RMatrix& G_II_sup);

/// 1+2 qubit bound g^11 (1 + 2 delta / (1 - delta)) for orthogonalized blocks.
BoundResult nui_bound_12(double g11_sup, const RMatrix& G_NN_sup, const RMatrix& V_NN,
                         const Tolerances& tol = default_tolerances());
/// Same from a full 3x3 G^-1; NotBlockDiagonal unless interest/nuisance blocks decouple.
BoundResult nui_bound_12(const RMatrix& G_inv, const RMatrix& V_NN, const Tolerances& tol = default_tolerances());

/// 2+1 qubit bound C^N(W_I, G^II) (1 + g^33 / (V_33 - g^33)).
BoundResult nui_bound_21(const RMatrix& W_I, const RMatrix& G_II_sup, double g33_sup, double V_33,
                         const Tolerances& tol = default_tolerances());
BoundResult nui_bound_21(const RMatrix& W_I, const RMatrix& G_inv, double V_33,
                         const Tolerances& tol = default_tolerances());

struct EliminationResult {
  BoundResult bound;    // value, optimal_weights (full W*), components
  RMatrix W_IN;         // m x (n-m)
  RMatrix W_N;          // (n-m) x (n-m)
  double direct = 0.0;  // Tr(W* M)
};

/// min over (W_IN, W_N) of Tr(W M) with W_I fixed:
/// Tr(W_I (M_II - M_IN M_NN^-1 M_NI)). Verifies the optimizer directly.
EliminationResult classical_weight_elimination(const RMatrix& M, const RMatrix& W_I,
                                               const Tolerances& tol = default_tolerances());

/// V_II - J^II - (V_IN - J^IN)(V_NN - J^NN)^-1 (V_NI - J^NI), with J^.. the
/// blocks of J^-1. PSD for every locally unbiased estimator.
RMatrix classical_tradeoff_residual(const RMatrix& V, const RMatrix& J, int m,
                                    const Tolerances& tol = default_tolerances());

}  // namespace qnuis
