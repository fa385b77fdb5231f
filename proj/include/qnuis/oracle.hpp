#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qnuis/models.hpp"
#include "qnuis/povm.hpp"

namespace qnuis {

struct OracleConfig {
  std::uint64_t seed = 20240601;
  int grid_density = 64;
  int refinement_rounds = 3;
  bool use_pvm_grid = true;
  bool use_mixtures = false;
  bool use_random = false;
  int random_candidates = 2000;
  int mixture_grid_density = 16;
  std::vector<double> mixture_weights{0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99};

  /// Throws InvalidArgument for grid_density < 8, negative rounds, no family.
  void validate() const;
};

/// Qubit effect a I + r.sigma.
struct BlochEffect {
  double a = 0.0;
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
};

struct OracleResult {
  double value = 0.0;
  std::string family;  // pvm-grid, mixtures or random-4-outcome
  std::vector<BlochEffect> effects;
  Povm povm;
  std::vector<double> trace;  // incumbent after the initial sweep and after each round
  long evaluated = 0;
  long skipped = 0;
};

/// min over the configured families of Tr(W_I J^{II}[Pi]).
OracleResult oracle_minimize(const ParametricModel& model, const RVector& theta, const RMatrix& W_I,
                             const OracleConfig& cfg, const Tolerances& tol = default_tolerances());

Povm povm_from_bloch(const std::vector<BlochEffect>& effects);

}  // namespace qnuis
