#include "qnuis/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "qnuis/errors.hpp"

namespace qnuis {

namespace {

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    std::ostringstream os;
    os << what << " must be square and non-empty, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::ShapeMismatch, os.str());
  }
  if (!m.allFinite()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " has non-finite entries");
}

void require_hermitian(const CMatrix& m, const char* what, const Tolerances& tol) {
  require_square(m, what);
  const double defect = hermitian_defect(m);
  if (defect > tol.hermitian_input) {
    std::ostringstream os;
    os << what << " violates Hermitian symmetry by " << defect;
    throw Error(ErrorCode::NonHermitianInput, os.str());
  }
}

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

// Eigenvalues clamped to zero above -psd_clamp, NotPsd below -not_psd.
Eigen::SelfAdjointEigenSolver<CMatrix> psd_eigen(const CMatrix& a, const char* what,
                                                 const Tolerances& tol) {
  require_hermitian(a, what, tol);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
  const double lo = es.eigenvalues().minCoeff();
  if (lo < -tol.not_psd) {
    std::ostringstream os;
    os << what << " has eigenvalue " << lo;
    throw Error(ErrorCode::NotPsd, os.str());
  }
  return es;
}

}  // namespace

CMatrix EigenDecomposition::reconstruct() const {
  CMatrix out = CMatrix::Zero(projectors.front().rows(), projectors.front().cols());
  for (std::size_t k = 0; k < projectors.size(); ++k) out += eigenvalues[k] * projectors[k];
  return out;
}

double hermitian_defect(const CMatrix& h) {
  if (h.rows() != h.cols()) return std::numeric_limits<double>::infinity();
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

EigenDecomposition eig_hermitian(const CMatrix& h, const Tolerances& tol) {
  require_hermitian(h, "eig_hermitian input", tol);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();

  EigenDecomposition out;
  Eigen::Index k = 0;
  while (k < vals.size()) {
    Eigen::Index end = k + 1;
    while (end < vals.size() && vals(end) - vals(end - 1) < tol.eigen_gap) ++end;
    CMatrix p = CMatrix::Zero(h.rows(), h.cols());
    double sum = 0.0;
    for (Eigen::Index j = k; j < end; ++j) {
      p += vecs.col(j) * vecs.col(j).adjoint();
      sum += vals(j);
    }
    out.eigenvalues.push_back(sum / static_cast<double>(end - k));
    out.projectors.push_back(hermitian_part(p));
    k = end;
  }
  return out;
}

CMatrix psd_sqrt(const CMatrix& a, const Tolerances& tol) {
  auto es = psd_eigen(a, "psd_sqrt input", tol);
  RVector roots = es.eigenvalues().unaryExpr([](double v) { return v > 0.0 ? std::sqrt(v) : 0.0; });
  CMatrix r = es.eigenvectors() * roots.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return hermitian_part(r);
}

double fidelity(const CMatrix& a, const CMatrix& b, const Tolerances& tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::ShapeMismatch, "fidelity arguments differ in shape");
  psd_eigen(b, "fidelity second argument", tol);
  const CMatrix ra = psd_sqrt(a, tol);
  const CMatrix inner = hermitian_part(ra * b * ra);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(inner, Eigen::EigenvaluesOnly);
  double f = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double v = es.eigenvalues()(k);
    if (v > 0.0) f += std::sqrt(v);
  }
  return f;
}

double fidelity(const RMatrix& a, const RMatrix& b, const Tolerances& tol) {
  return fidelity(CMatrix(a.cast<Complex>()), CMatrix(b.cast<Complex>()), tol);
}

CMatrix solve_sld(const CMatrix& rho, const CMatrix& drho, const Tolerances& tol) {
  require_hermitian(rho, "state", tol);
  require_hermitian(drho, "state derivative", tol);
  if (rho.rows() != drho.rows()) throw Error(ErrorCode::ShapeMismatch, "state and derivative differ in dimension");
  const Complex tr = drho.trace();
  if (std::abs(tr) > tol.traceless) {
    std::ostringstream os;
    os << "state derivative has trace " << std::abs(tr);
    throw Error(ErrorCode::InvalidArgument, os.str());
  }

  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(rho));
  const RVector& lam = es.eigenvalues();
  if (lam.minCoeff() <= tol.rank_floor) {
    std::ostringstream os;
    os << "state has minimum eigenvalue " << lam.minCoeff();
    throw Error(ErrorCode::RankDeficientState, os.str());
  }
  const CMatrix& u = es.eigenvectors();
  CMatrix d = u.adjoint() * drho * u;
  for (Eigen::Index a = 0; a < d.rows(); ++a)
    for (Eigen::Index b = 0; b < d.cols(); ++b) d(a, b) *= 2.0 / (lam(a) + lam(b));
  return hermitian_part(u * d * u.adjoint());
}

double sld_inner(const CMatrix& rho, const CMatrix& x, const CMatrix& y) {
  return 0.5 * (rho * (y * x.adjoint() + x.adjoint() * y)).trace().real();
}

double min_eigenvalue(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double min_eigenvalue(const RMatrix& s) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double condition_number(const RMatrix& s) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

RMatrix psd_pinv(const RMatrix& s, double rel_cutoff) {
  if (s.size() == 0) return s;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (s + s.transpose()));
  const double cutoff = rel_cutoff * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  RVector inv = es.eigenvalues().unaryExpr([cutoff](double v) { return v > cutoff ? 1.0 / v : 0.0; });
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

namespace pauli {

CMatrix identity() { return CMatrix::Identity(2, 2); }

CMatrix x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

CMatrix y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

CMatrix z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

CMatrix dot(const Eigen::Vector3d& v) { return v(0) * x() + v(1) * y() + v(2) * z(); }

CMatrix state(const Eigen::Vector3d& bloch) { return 0.5 * (identity() + dot(bloch)); }

Eigen::Vector3d components(const CMatrix& m) {
  return {(m * x()).trace().real(), (m * y()).trace().real(), (m * z()).trace().real()};
}

}  // namespace pauli

}  // namespace qnuis
