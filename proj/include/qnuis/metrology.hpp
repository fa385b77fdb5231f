#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qnuis/linalg.hpp"

namespace qnuis {

/// Qubit under a fluctuating magnetic field with correlation rate Gamma.
/// Variant 1 uses the time-dependent kernels, variant 2 their t -> infinity
/// limit, variant 3 keeps only gamma3 = b2 / Gamma.
struct NoiseModelSpec {
  int variant = 1;
  double omega = 1.0;
  double b2 = 0.0;
  double gamma_corr = 1.0;
  Eigen::Vector3d s0 = Eigen::Vector3d(1.0, 0.0, 0.0);

  /// Throws InvalidSpec.
  void validate() const;
};

struct Kernels {
  double delta_omega = 0.0;
  double gamma1 = 0.0;
  double gamma3 = 0.0;
};

struct DecayState {
  double Gamma1 = 0.0;
  double Gamma3 = 0.0;
  double Omega = 0.0;
};

/// Preset parameter sets (omega, b2, Gamma): fig1a, fig1b, fig1c, all with
/// s0 = (sqrt(0.91), 0, 0.3).
NoiseModelSpec noise_preset(const std::string& name, int variant);
std::vector<std::string> noise_preset_names();

Kernels kernels(const NoiseModelSpec& spec, double t);
DecayState decay_state(const NoiseModelSpec& spec, double t);

/// s(t) = A(t) s0 with A = diag(e^-Gamma1 R(Omega), e^-Gamma3).
Eigen::Vector3d evolve_bloch(const NoiseModelSpec& spec, double t);

/// Parameters of the metrology model: (omega, b2, Gamma) for variants 1 and 2,
/// (omega, gamma = b2 / Gamma) for variant 3.
RVector metrology_parameters(const NoiseModelSpec& spec);
NoiseModelSpec with_parameters(const NoiseModelSpec& spec, const RVector& params);

/// Closed-form 3 x n Jacobian of s(t) with respect to metrology_parameters.
Eigen::Matrix<double, 3, Eigen::Dynamic> bloch_derivatives(const NoiseModelSpec& spec, double t);

/// Fourth-order central differences of s(t) in each parameter. Steps are
/// rel_step times min(|theta_i|, 1/t), shrunk further when the exponents move
/// by more than 1e-2 per step.
Eigen::Matrix<double, 3, Eigen::Dynamic> bloch_derivatives_fd(const NoiseModelSpec& spec, double t,
                                                               double rel_step = 1e-3);

/// Unscaled SLD Fisher matrix from the Bloch formula (underflows for heavy damping).
RMatrix metrology_fisher(const NoiseModelSpec& spec, double t);

enum class PointStatus { Ok, RankDeficientState, SingularFisher };
std::string to_string(PointStatus s);

struct FisherPoint {
  double t = 0.0;
  PointStatus status = PointStatus::Ok;
  double g11 = 0.0;          // G_11, omega coordinates
  double g11_partial = 0.0;  // 1 / (G^-1)_11, NaN when singular
  double log_g11 = 0.0;
  double log_g11_partial = 0.0;
};

struct FisherTimeSeries {
  int variant = 0;
  std::vector<double> times;
  std::vector<FisherPoint> points;
  std::vector<double> g11;
  std::vector<double> g11_partial;
  std::vector<double> g11_normalized;          // g11 / t^2
  std::vector<double> g11_partial_normalized;  // g11_partial / t^2
};

FisherPoint fisher_point(const NoiseModelSpec& spec, double t, const Tolerances& tol = default_tolerances());

FisherTimeSeries fisher_time_series(const NoiseModelSpec& spec, const std::vector<double>& times,
                                    const Tolerances& tol = default_tolerances());

enum class Spacing { Linear, Log };

std::vector<double> time_grid(double tmin, double tmax, int count, Spacing spacing);

/// 200 log-spaced points on [1e-3, 30 / Gamma].
std::vector<double> default_time_grid(const NoiseModelSpec& spec);

}  // namespace qnuis
