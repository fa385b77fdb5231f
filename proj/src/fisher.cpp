#include "qnuis/fisher.hpp"

#include <cmath>
#include <sstream>

#include "qnuis/errors.hpp"
#include "qnuis/povm.hpp"

namespace qnuis {

namespace {

void require_square_real(const RMatrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + " must be square and non-empty");
  if (!a.allFinite()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " has non-finite entries");
}

void require_partition(const RMatrix& J, int m) {
  require_square_real(J, "Fisher matrix");
  if (m < 1 || m >= J.rows()) {
    std::ostringstream os;
    os << "interest count m=" << m << " must lie in [1, " << J.rows() - 1 << "]";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

RMatrix symmetrize(const RMatrix& a) { return 0.5 * (a + a.transpose()); }

}  // namespace

BlockSplit split_blocks(const RMatrix& a, int m) {
  require_partition(a, m);
  const auto k = a.rows() - m;
  BlockSplit s;
  s.m = m;
  s.II = a.topLeftCorner(m, m);
  s.IN = a.topRightCorner(m, k);
  s.NI = a.bottomLeftCorner(k, m);
  s.NN = a.bottomRightCorner(k, k);
  return s;
}

int psd_rank(const RMatrix& s, double rel_cutoff) {
  if (s.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(symmetrize(s), Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (top == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > rel_cutoff * top) ++r;
  return r;
}

FisherBundle sld_fisher(const CMatrix& rho, const std::vector<CMatrix>& drho, const Tolerances& tol) {
  if (drho.empty()) throw Error(ErrorCode::InvalidArgument, "no state derivatives supplied");
  FisherBundle b;
  const auto n = static_cast<Eigen::Index>(drho.size());
  for (const auto& d : drho) b.slds.push_back(solve_sld(rho, d, tol));
  b.G.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = sld_inner(rho, b.slds[static_cast<std::size_t>(i)], b.slds[static_cast<std::size_t>(j)]);
      b.G(i, j) = v;
      b.G(j, i) = v;
    }
  const double cond = condition_number(b.G);
  if (!(cond <= tol.singular_condition)) {
    std::ostringstream os;
    os << "SLD Fisher matrix has condition number " << cond;
    throw Error(ErrorCode::SingularFisher, os.str());
  }
  b.G_inv = symmetrize(b.G.llt().solve(RMatrix::Identity(n, n)));
  for (Eigen::Index i = 0; i < n; ++i) {
    CMatrix dual = CMatrix::Zero(rho.rows(), rho.cols());
    for (Eigen::Index j = 0; j < n; ++j) dual += b.G_inv(j, i) * b.slds[static_cast<std::size_t>(j)];
    b.duals.push_back(dual);
  }
  return b;
}

FisherBundle sld_fisher(const ParametricModel& model, const RVector& theta, const Tolerances& tol) {
  const CMatrix rho = evaluate(model, theta, tol);
  return sld_fisher(rho, derivatives(model, theta, tol), tol);
}

RMatrix bloch_sld_fisher(const Eigen::Vector3d& s, const Eigen::Matrix<double, 3, Eigen::Dynamic>& ds) {
  const RVector proj = ds.transpose() * s;
  return ds.transpose() * ds + proj * proj.transpose() / (1.0 - s.squaredNorm());
}

ClassicalFisher classical_fisher(const CMatrix& rho, const std::vector<CMatrix>& drho, const Povm& povm,
                                 const Tolerances& tol) {
  require_valid_povm(povm, tol);
  const auto n = static_cast<Eigen::Index>(drho.size());
  ClassicalFisher out;
  out.J = RMatrix::Zero(n, n);
  RVector grad(n);
  for (const auto& e : povm.effects) {
    const double p = (rho * e).trace().real();
    if (p < tol.probability_floor) continue;
    for (Eigen::Index j = 0; j < n; ++j) grad(j) = (drho[static_cast<std::size_t>(j)] * e).trace().real();
    out.J += grad * grad.transpose() / p;
  }
  out.J = symmetrize(out.J);
  out.rank = psd_rank(out.J);
  return out;
}

ClassicalFisher classical_fisher(const ParametricModel& model, const RVector& theta, const Povm& povm,
                                 const Tolerances& tol) {
  const CMatrix rho = evaluate(model, theta, tol);
  return classical_fisher(rho, derivatives(model, theta, tol), povm, tol);
}

RMatrix partial_fisher(const RMatrix& J, int m, const Tolerances& tol) {
  const BlockSplit s = split_blocks(J, m);
  const double cond = condition_number(s.NN);
  if (!(cond <= tol.singular_condition)) {
    std::ostringstream os;
    os << "nuisance block has condition number " << cond;
    throw Error(ErrorCode::SingularNuisanceBlock, os.str());
  }
  return symmetrize(s.II - s.IN * s.NN.ldlt().solve(s.NI));
}

RMatrix effective_partial_fisher(const RMatrix& J, int m) {
  const BlockSplit s = split_blocks(J, m);
  return symmetrize(s.II - s.IN * psd_pinv(s.NN) * s.NI);
}

RMatrix information_loss(const RMatrix& J, int m, const Tolerances& tol) {
  const RMatrix partial = partial_fisher(J, m, tol);
  const BlockSplit s = split_blocks(J, m);
  if (!(condition_number(partial) <= tol.singular_condition) || !(condition_number(s.II) <= tol.singular_condition))
    throw Error(ErrorCode::SingularFisher, "interest block is singular");
  const auto I = RMatrix::Identity(m, m);
  return symmetrize(partial.ldlt().solve(I) - s.II.ldlt().solve(I));
}

}  // namespace qnuis
