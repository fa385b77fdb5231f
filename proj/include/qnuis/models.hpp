#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qnuis/linalg.hpp"

namespace qnuis {

using BlochFn = std::function<Eigen::Vector3d(const RVector&)>;
/// 3 x n matrix of Bloch-vector partial derivatives.
using BlochJacobianFn = std::function<Eigen::Matrix<double, 3, Eigen::Dynamic>(const RVector&)>;

/// Parametric family of density matrices. The first m parameters are the
/// parameters of interest, the remaining n - m are nuisance parameters.
struct ParametricModel {
  std::string name;
  int n = 0;
  int m = 0;
  int dim = 2;

  std::function<CMatrix(const RVector&)> state_fn;
  /// Optional closed-form derivatives, one traceless Hermitian matrix per parameter.
  std::function<std::vector<CMatrix>(const RVector&)> deriv_fn;
  /// Open domain; `margin` shrinks strict inequalities.
  std::function<bool(const RVector&, double margin)> domain;

  /// Qubit models also expose the Bloch map (and optionally its Jacobian).
  BlochFn bloch_fn;
  BlochJacobianFn bloch_jacobian_fn;

  /// Box that contains the part of the domain used for random sampling.
  RVector sample_lo;
  RVector sample_hi;

  bool is_qubit() const { return static_cast<bool>(bloch_fn); }
  bool has_closed_derivatives() const { return static_cast<bool>(deriv_fn); }
};

/// Throws OutOfDomain unless theta has length n and lies in the domain.
void require_in_domain(const ParametricModel& model, const RVector& theta,
                       const Tolerances& tol = default_tolerances());

CMatrix evaluate(const ParametricModel& model, const RVector& theta,
                 const Tolerances& tol = default_tolerances());

/// Closed-form derivatives when available, central finite differences otherwise.
std::vector<CMatrix> derivatives(const ParametricModel& model, const RVector& theta,
                                 const Tolerances& tol = default_tolerances());

/// Central differences with step fd_step * max(1, |theta_i|); the step is
/// shrunk once by 10x if theta +- h leaves the domain.
std::vector<CMatrix> finite_difference_derivatives(const ParametricModel& model, const RVector& theta,
                                                   const Tolerances& tol = default_tolerances());

/// Bloch vector and its 3 x n Jacobian for qubit models. The Jacobian falls
/// back to the matrix derivatives when no closed form is attached.
Eigen::Vector3d bloch_vector(const ParametricModel& model, const RVector& theta,
                             const Tolerances& tol = default_tolerances());
Eigen::Matrix<double, 3, Eigen::Dynamic> bloch_jacobian(const ParametricModel& model, const RVector& theta,
                                                        const Tolerances& tol = default_tolerances());

/// Fixed parameters: "C" takes theta0, "F" takes s0 (three values, default (1,0,0)).
ParametricModel make_builtin(const std::string& name, const std::vector<double>& fixed = {});

std::vector<std::string> builtin_names();

/// Qubit model rho = (I + s(theta).sigma)/2 with closed-form Bloch Jacobian.
ParametricModel make_bloch_model(std::string name, int n, int m, BlochFn s, BlochJacobianFn ds,
                                 std::function<bool(const RVector&, double)> domain, RVector lo, RVector hi);

/// theta = forward(xi) with xi_I = theta_I.
struct Reparametrization {
  std::string name;
  std::function<RVector(const RVector&)> forward;
  std::function<RMatrix(const RVector&)> jacobian;  // d theta / d xi
  std::function<RVector(const RVector&)> inverse;   // optional
  RVector sample_lo;
  RVector sample_hi;
};

Reparametrization identity_reparametrization(int n);

/// Parameter-orthogonalizing reparametrization shipped for models A-D,
/// using c(xi) = tanh(xi).
Reparametrization builtin_reparametrization(const ParametricModel& model);

ParametricModel orthogonalize(const ParametricModel& model, const Reparametrization& repar,
                              const Tolerances& tol = default_tolerances());

/// Uniform rejection sampling in the sample box, keeping points whose state
/// has minimum eigenvalue above `eig_margin`.
RVector sample_interior(const ParametricModel& model, std::mt19937_64& rng, double eig_margin = 0.02,
                        const Tolerances& tol = default_tolerances());

}  // namespace qnuis
