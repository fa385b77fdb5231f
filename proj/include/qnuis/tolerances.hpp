#pragma once

namespace qnuis {

/// Numerical thresholds shared by every module. A single record so that the
/// CLI and the property suites can override them in one place.
struct Tolerances {
  // linalg-core
  double hermitian_input = 1e-8;  // NonHermitianInput beyond this
  double eigen_gap = 1e-9;        // merge eigenvalues closer than this
  double psd_clamp = 1e-10;       // eigenvalues above -psd_clamp are clamped to 0
  double not_psd = 1e-8;          // NotPsd below -not_psd
  double rank_floor = 1e-10;      // min eigenvalue of a full-rank state
  double traceless = 1e-10;       // |Tr drho| allowed by solve_sld

  // models
  double fd_step = 1e-5;          // relative finite-difference step
  double domain_margin = 1e-9;    // strict-inequality margin for domains
  double density_trace = 1e-10;   // |Tr rho - 1|
  double jacobian_det = 1e-12;    // SingularJacobian below this

  // fisher
  double probability_floor = 1e-12;
  double singular_condition = 1e10;

  // bounds
  double weight_strict = 1e-10;   // min eigenvalue for a strict weight matrix
  double feasibility_margin = 1e-12;
  double block_diagonal = 1e-6;   // max off-block entry of pre-orthogonalized input
  double limit_cauchy = 1e-6;

  // povm
  double povm_psd = 1e-10;
  double povm_completeness = 1e-9;
  double score_singular = 1e-10;  // smallest singular value of interest scores
  double unbiasedness = 1e-6;
};

/// Library-wide defaults.
inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace qnuis
