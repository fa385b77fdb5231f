#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "qnuis/linalg.hpp"

using namespace qnuis;
using testing::max_abs_diff;

namespace {

CMatrix diag2(double a, double b) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

CMatrix random_psd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return a * a.adjoint();
}

}  // namespace

TEST_CASE("eig_hermitian of sigma_x") {
  const auto d = eig_hermitian(pauli::x());
  REQUIRE(d.eigenvalues.size() == 2);
  CHECK(d.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(d.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(max_abs_diff(d.projectors[0], 0.5 * (pauli::identity() - pauli::x())) < 1e-12);
  CHECK(max_abs_diff(d.projectors[1], 0.5 * (pauli::identity() + pauli::x())) < 1e-12);
  CHECK(max_abs_diff(d.reconstruct(), pauli::x()) < 1e-12);
}

TEST_CASE("eig_hermitian merges a degenerate spectrum") {
  const auto d = eig_hermitian(pauli::identity());
  REQUIRE(d.eigenvalues.size() == 1);
  CHECK(d.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(max_abs_diff(d.projectors[0], pauli::identity()) < 1e-12);
}

TEST_CASE("eig_hermitian of a diagonal matrix") {
  const auto d = eig_hermitian(diag2(0.25, 0.75));
  REQUIRE(d.eigenvalues.size() == 2);
  CHECK(d.eigenvalues[0] == doctest::Approx(0.25));
  CHECK(d.eigenvalues[1] == doctest::Approx(0.75));
  CHECK(max_abs_diff(d.projectors[0], diag2(1, 0)) < 1e-12);
  CHECK(max_abs_diff(d.projectors[1], diag2(0, 1)) < 1e-12);
}

TEST_CASE("eig_hermitian rejects non-Hermitian input") {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_ERROR(eig_hermitian(m), ErrorCode::NonHermitianInput);
  CHECK_ERROR(eig_hermitian(CMatrix::Zero(2, 3)), ErrorCode::ShapeMismatch);
}

TEST_CASE("psd_sqrt") {
  CHECK(max_abs_diff(psd_sqrt(diag2(4, 9)), diag2(2, 3)) < 1e-12);
  CHECK(max_abs_diff(psd_sqrt(pauli::identity()), pauli::identity()) < 1e-12);
  const CMatrix rho = pauli::state(Eigen::Vector3d(0, 0, 0.6));
  CHECK(max_abs_diff(psd_sqrt(rho), diag2(std::sqrt(0.8), std::sqrt(0.2))) < 1e-12);
  CHECK(max_abs_diff(psd_sqrt(diag2(1, -1e-11)), diag2(1, 0)) < 1e-12);
  CHECK_ERROR(psd_sqrt(diag2(1, -1e-6)), ErrorCode::NotPsd);

  std::mt19937_64 rng(3);
  const CMatrix a = random_psd(rng, 4);
  const CMatrix r = psd_sqrt(a);
  CHECK(max_abs_diff(r * r, a) < 1e-10);
  CHECK(hermitian_defect(r) < 1e-12);
}

TEST_CASE("fidelity") {
  CHECK(fidelity(diag2(1, 4), diag2(9, 16)) == doctest::Approx(11.0));
  CHECK(fidelity(CMatrix(CMatrix::Identity(3, 3)), CMatrix(CMatrix::Identity(3, 3))) == doctest::Approx(3.0));

  std::mt19937_64 rng(11);
  for (int k = 0; k < 10; ++k) {
    const CMatrix a = random_psd(rng, 3), b = random_psd(rng, 3);
    CHECK(std::abs(fidelity(a, b) - oracle::fidelity_via_product(a, b)) < 1e-8);
    const RMatrix ra = oracle::random_spd(rng, 3, 0.0), rb = oracle::random_spd(rng, 3, 0.0);
    CHECK(std::abs(fidelity(ra, rb) - oracle::fidelity_via_product(ra, rb)) < 1e-8);
  }
}

TEST_CASE("solve_sld examples") {
  const CMatrix I = pauli::identity();
  CHECK(max_abs_diff(solve_sld(0.5 * I, 0.5 * pauli::x()), pauli::x()) < 1e-12);

  const CMatrix rho = pauli::state(Eigen::Vector3d(0, 0, 0.5));
  const CMatrix expected = (4.0 * pauli::z() - 2.0 * I) / 3.0;
  CHECK(max_abs_diff(solve_sld(rho, 0.5 * pauli::z()), expected) < 1e-12);

  CHECK(solve_sld(rho, CMatrix::Zero(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("solve_sld on random full-rank states") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    CMatrix rho = random_psd(rng, 3) + 0.1 * CMatrix::Identity(3, 3);
    rho /= rho.trace().real();
    CMatrix d = random_psd(rng, 3);
    d -= d.trace().real() / 3.0 * CMatrix::Identity(3, 3);
    const CMatrix L = solve_sld(rho, d);
    CHECK(hermitian_defect(L) < 1e-12);
    CHECK(max_abs_diff(0.5 * (rho * L + L * rho), d) < 1e-9);
    CHECK(std::abs((rho * L).trace()) < 1e-9);
  }
}

TEST_CASE("solve_sld errors") {
  const CMatrix pure = pauli::state(Eigen::Vector3d(0, 0, 1));
  CHECK_ERROR(solve_sld(pure, 0.5 * pauli::x()), ErrorCode::RankDeficientState);
  CHECK_ERROR(solve_sld(0.5 * pauli::identity(), pauli::identity()), ErrorCode::InvalidArgument);
  CHECK_ERROR(solve_sld(0.5 * pauli::identity(), CMatrix::Zero(3, 3)), ErrorCode::ShapeMismatch);
}

TEST_CASE("psd helpers") {
  RMatrix s(2, 2);
  s << 2, 1, 1, 2;
  CHECK(min_eigenvalue(s) == doctest::Approx(1.0));
  CHECK(condition_number(s) == doctest::Approx(3.0));
  RMatrix singular(2, 2);
  singular << 1, 1, 1, 1;
  CHECK(std::isinf(condition_number(singular)));
  CHECK(max_abs_diff(psd_pinv(singular), singular / 4.0) < 1e-12);
}

TEST_CASE("pauli helpers round-trip") {
  const Eigen::Vector3d v(0.1, -0.2, 0.3);
  CHECK((pauli::components(pauli::dot(v)) - 2.0 * v).norm() < 1e-14);
  CHECK(std::abs(pauli::state(v).trace() - Complex(1.0)) < 1e-14);
}
