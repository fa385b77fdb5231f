#pragma once

#include <vector>

#include "qnuis/linalg.hpp"
#include "qnuis/models.hpp"

namespace qnuis {

struct Povm;

struct FisherBundle {
  std::vector<CMatrix> slds;
  RMatrix G;
  RMatrix G_inv;
  std::vector<CMatrix> duals;  // L^i = sum_j (G^-1)_ji L_j
};

struct BlockSplit {
  int m = 0;
  RMatrix II, IN, NI, NN;
};

BlockSplit split_blocks(const RMatrix& a, int m);

/// SLD Fisher information. Throws RankDeficientState or SingularFisher
/// (condition number above singular_condition).
FisherBundle sld_fisher(const CMatrix& rho, const std::vector<CMatrix>& drho,
                        const Tolerances& tol = default_tolerances());
FisherBundle sld_fisher(const ParametricModel& model, const RVector& theta,
                        const Tolerances& tol = default_tolerances());

/// Qubit closed form G = D^T D + (D^T s)(s^T D) / (1 - |s|^2).
RMatrix bloch_sld_fisher(const Eigen::Vector3d& s, const Eigen::Matrix<double, 3, Eigen::Dynamic>& ds);

struct ClassicalFisher {
  RMatrix J;
  int rank = 0;
};

/// Outcomes with probability below probability_floor are skipped.
ClassicalFisher classical_fisher(const CMatrix& rho, const std::vector<CMatrix>& drho, const Povm& povm,
                                 const Tolerances& tol = default_tolerances());
ClassicalFisher classical_fisher(const ParametricModel& model, const RVector& theta, const Povm& povm,
                                 const Tolerances& tol = default_tolerances());

/// J_II - J_IN J_NN^-1 J_NI. Throws SingularNuisanceBlock when J_NN is
/// singular in the condition-number sense.
RMatrix partial_fisher(const RMatrix& J, int m, const Tolerances& tol = default_tolerances());

/// Same Schur complement with the Moore-Penrose inverse of J_NN; defined for
/// every PSD J because null(J_NN) lies in null(J_IN).
RMatrix effective_partial_fisher(const RMatrix& J, int m);

/// (partial)^-1 - (J_II)^-1
RMatrix information_loss(const RMatrix& J, int m, const Tolerances& tol = default_tolerances());

/// Numerical rank of a symmetric PSD matrix relative to its largest eigenvalue.
int psd_rank(const RMatrix& s, double rel_cutoff = 1e-10);

}  // namespace qnuis
