#pragma once

#include <random>
#include <string>
#include <vector>

#include "qnuis/fisher.hpp"
#include "qnuis/linalg.hpp"
#include "qnuis/models.hpp"

namespace qnuis {

struct Povm {
  std::vector<CMatrix> effects;
  std::vector<std::string> labels;

  std::size_t size() const { return effects.size(); }
};

struct PovmDiagnostics {
  bool valid = true;
  double min_eigenvalue = 0.0;       // smallest eigenvalue over all effects
  double completeness_defect = 0.0;  // max |sum E - I|
  std::vector<std::string> issues;
};

PovmDiagnostics validate_povm(const Povm& p, const Tolerances& tol = default_tolerances());

/// Throws InvalidPovm listing the diagnostics when p is not a valid POVM.
void require_valid_povm(const Povm& p, const Tolerances& tol = default_tolerances());

/// Spectral projectors of H, ascending; labels are the eigenvalues.
Povm pvm_from_observable(const CMatrix& h, const Tolerances& tol = default_tolerances());

/// Qubit PVM {(I - u.sigma)/2, (I + u.sigma)/2} for a nonzero direction u.
Povm bloch_pvm(const Eigen::Vector3d& direction);

/// PVM of the dual SLD L^1; requires a single parameter of interest.
Povm optimal_interest_pvm(const ParametricModel& model, const RVector& theta,
                          const Tolerances& tol = default_tolerances());

/// Estimator for all n parameters or for the m parameters of interest.
enum class Scope { Full, Interest };

struct Estimator {
  Scope scope = Scope::Interest;
  std::vector<std::string> labels;
  std::vector<RVector> values;  // one estimate per outcome, aligned with labels

  const RVector& at(const std::string& label) const;
};

/// theta_hat(x) = theta + J^-1 score(x) (full scope) or the effective-score
/// version theta_I + J_eff^-1 (s_I - J_IN J_NN^+ s_N) (interest scope).
Estimator locally_unbiased_estimator(const ParametricModel& model, const RVector& theta, const Povm& povm,
                                     Scope scope, const Tolerances& tol = default_tolerances());

struct UnbiasednessReport {
  bool pass = false;
  double mean_residual = 0.0;        // max |E[theta_hat_i] - theta_i|
  double derivative_residual = 0.0;  // max |d_j E[theta_hat_i] - delta_ij|
  RMatrix derivative;                // d_j E[theta_hat_i]
};

UnbiasednessReport check_local_unbiasedness(const ParametricModel& model, const RVector& theta, const Povm& povm,
                                            const Estimator& est, const Tolerances& tol = default_tolerances());

RMatrix mse_matrix(const ParametricModel& model, const RVector& theta, const Povm& povm, const Estimator& est,
                   const Tolerances& tol = default_tolerances());

/// Performs p_star with probability 1 - eps and p0 with probability eps.
Povm randomize_povms(const Povm& p_star, const Povm& p0, double eps, const Tolerances& tol = default_tolerances());

/// S^{-1/2} A_k S^{-1/2} with A_k = v_k v_k^dagger for complex Gaussian v_k.
Povm random_povm(std::mt19937_64& rng, int outcomes, int dim = 2);

/// Projective measurement along a uniformly random Bloch direction.
Povm random_qubit_pvm(std::mt19937_64& rng);

}  // namespace qnuis
