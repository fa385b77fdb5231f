#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qnuis/tolerances.hpp"

namespace qnuis {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Spectral decomposition with degenerate eigenvalues merged into a single
/// projector. Eigenvalues are ascending.
struct EigenDecomposition {
  std::vector<double> eigenvalues;
  std::vector<CMatrix> projectors;

  CMatrix reconstruct() const;
};

/// Largest entry of |H - H^dagger|.
double hermitian_defect(const CMatrix& h);

EigenDecomposition eig_hermitian(const CMatrix& h, const Tolerances& tol = default_tolerances());

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// [-psd_clamp, 0) are treated as zero.
CMatrix psd_sqrt(const CMatrix& a, const Tolerances& tol = default_tolerances());

/// Tr sqrt(sqrt(A) B sqrt(A)) for PSD A, B.
double fidelity(const CMatrix& a, const CMatrix& b, const Tolerances& tol = default_tolerances());
double fidelity(const RMatrix& a, const RMatrix& b, const Tolerances& tol = default_tolerances());

/// Symmetric logarithmic derivative: the Hermitian L with
/// drho = (rho L + L rho) / 2, solved in the eigenbasis of rho.
CMatrix solve_sld(const CMatrix& rho, const CMatrix& drho,
                  const Tolerances& tol = default_tolerances());

/// Re Tr(rho X^dagger Y), the symmetric inner product for Hermitian X, Y.
double sld_inner(const CMatrix& rho, const CMatrix& x, const CMatrix& y);

double min_eigenvalue(const CMatrix& h);
double min_eigenvalue(const RMatrix& s);

/// Condition number of a symmetric PSD matrix; infinity if singular.
double condition_number(const RMatrix& s);

/// Moore-Penrose inverse of a symmetric PSD matrix; eigenvalues below
/// `rel_cutoff * max(1, largest)` are dropped.
RMatrix psd_pinv(const RMatrix& s, double rel_cutoff = 1e-12);

namespace pauli {
CMatrix identity();
CMatrix x();
CMatrix y();
CMatrix z();
/// (I + s . sigma) / 2
CMatrix state(const Eigen::Vector3d& bloch);
/// s . sigma
CMatrix dot(const Eigen::Vector3d& v);
/// (Tr(M sigma_x), Tr(M sigma_y), Tr(M sigma_z)) real parts.
Eigen::Vector3d components(const CMatrix& m);
}  // namespace pauli

}  // namespace qnuis
