#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "qnuis/bounds.hpp"
#include "qnuis/fisher.hpp"
#include "qnuis/models.hpp"

using namespace qnuis;
using testing::max_abs_diff;

namespace {
RMatrix m2(double a, double b, double c, double d) {
  RMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}
RMatrix diag(std::initializer_list<double> xs) {
  RVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v.asDiagonal();
}
}  // namespace

TEST_CASE("SLD Cramer-Rao bound") {
  CHECK(sld_cr_bound(RMatrix::Identity(2, 2), diag({0.75, 4})) == doctest::Approx(4.75));
  CHECK(sld_cr_bound(RMatrix::Zero(2, 2), diag({0.75, 4})) == 0.0);
  CHECK(sld_cr_bound(diag({2, 0}), diag({0.3, 7})) == doctest::Approx(0.6));
}

TEST_CASE("Nagaoka bound") {
  CHECK(nagaoka_bound(RMatrix::Identity(2, 2), diag({0.64, 1.0})) == doctest::Approx(3.24));
  CHECK(nagaoka_bound(RMatrix::Identity(2, 2), RMatrix::Identity(2, 2)) == doctest::Approx(4.0));
  CHECK(nagaoka_bound(diag({1, 1e-9}), diag({0.64, 1.0})) == doctest::Approx(0.64).epsilon(1e-4));
  CHECK_ERROR(nagaoka_bound(diag({1, 0}), diag({0.64, 1.0})), ErrorCode::NonPositiveWeight);
}

TEST_CASE("HGM bound") {
  CHECK(hgm_bound(RMatrix::Identity(3, 3), RMatrix::Identity(3, 3)) == doctest::Approx(9.0));
  CHECK(hgm_bound(RMatrix::Identity(3, 3), diag({4, 1, 0.25})) == doctest::Approx(12.25));
  std::mt19937_64 rng(53);
  for (int k = 0; k < 20; ++k) {
    const RMatrix W = oracle::random_spd(rng, 3), G = oracle::random_spd(rng, 3);
    const double f = oracle::fidelity_via_product(G, W);
    CHECK(std::abs(hgm_bound(W, G) - f * f) < 1e-8 * std::max(1.0, f * f));
  }
}

TEST_CASE("weight-limit bound") {
  const auto r = weight_limit_bound(WeightLimitKind::Nagaoka11, RMatrix::Identity(1, 1), diag({0.75, 4}));
  CHECK(r.value == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(r.closed_form == doctest::Approx(0.75));
  CHECK(r.epsilons.size() == r.ladder.size());

  const auto r2 = weight_limit_bound(WeightLimitKind::Nagaoka11, 2.0 * RMatrix::Identity(1, 1), diag({0.75, 4}));
  CHECK(r2.value == doctest::Approx(2.0 * r.value).epsilon(1e-8));

  // Model D at (0.3, 0.4, 0.2): G^II = I - theta_I theta_I^T.
  const RVector t = (RVector(3) << 0.3, 0.4, 0.2).finished();
  const RMatrix G_inv = oracle::inverse_fisher("D", t);
  const RMatrix gII = G_inv.topLeftCorner(2, 2);
  const double expected = gII.trace() + 2.0 * std::sqrt(gII.determinant());
  const auto d = weight_limit_bound(WeightLimitKind::Hgm21, RMatrix::Identity(2, 2), G_inv);
  CHECK(d.value == doctest::Approx(expected).epsilon(1e-6));
  CHECK(d.closed_form == doctest::Approx(expected).epsilon(1e-12));

  const auto b = weight_limit_bound(WeightLimitKind::Hgm12, RMatrix::Identity(1, 1), oracle::inverse_fisher("B", t));
  CHECK(b.value == doctest::Approx(1.0 - 0.09).epsilon(1e-6));

  CHECK(parse_weight_limit_kind("hgm-2+1") == WeightLimitKind::Hgm21);
  CHECK(to_string(WeightLimitKind::Nagaoka11) == "nagaoka-1+1");
  CHECK_ERROR(parse_weight_limit_kind("bogus"), ErrorCode::InvalidArgument);
}

TEST_CASE("nui_bound_11") {
  const RMatrix G = diag({0.75, 4});
  const auto r = nui_bound_11(G, 0.0, 8.0);
  CHECK(r.value == doctest::Approx(1.5));
  CHECK(r.component("parent_bound") == doctest::Approx(0.75));
  CHECK(r.component("tradeoff") == doctest::Approx(0.75));
  CHECK(nui_bound_11(G, 0.0, 1e12).value == doctest::Approx(0.75).epsilon(1e-9));

  const RMatrix Gc = m2(0.5, 0.2, 0.2, 0.9);
  const double c = 0.37;
  const auto r2 = nui_bound_11(Gc, 0.2, 0.9 + Gc.determinant() / c);
  CHECK(r2.value == doctest::Approx(0.5 + c));
  CHECK(r.component("symmetric_relaxation") <= r.value);

  CHECK_ERROR(nui_bound_11(G, 0.0, 4.0), ErrorCode::NuisanceVarianceTooSmall);
  CHECK_ERROR(r.component("missing"), ErrorCode::InvalidArgument);
}

TEST_CASE("tradeoff determinant check") {
  CHECK(tradeoff_det_check(2.0 * RMatrix::Identity(2, 2), RMatrix::Identity(2, 2)) == doctest::Approx(0.0));
  const RMatrix g = diag({0.5, 2.0});
  CHECK(tradeoff_det_check(g, g) == doctest::Approx(-1.0));
  CHECK_ERROR(tradeoff_det_check(RMatrix::Identity(3, 3), g), ErrorCode::ShapeMismatch);
}

TEST_CASE("nui_bound_12") {
  const auto r = nui_bound_12(1.0, RMatrix::Identity(2, 2), 5.0 * RMatrix::Identity(2, 2));
  CHECK(r.component("delta_N") == doctest::Approx(0.25));
  CHECK(r.value == doctest::Approx(5.0 / 3.0));

  // delta = 0.5 when det(V - G) = 4 det G.
  const auto half = nui_bound_12(0.7, RMatrix::Identity(2, 2), 3.0 * RMatrix::Identity(2, 2));
  CHECK(half.component("delta_N") == doctest::Approx(0.5));
  CHECK(half.value == doctest::Approx(2.1));

  CHECK(nui_bound_12(0.7, RMatrix::Identity(2, 2), 1e8 * RMatrix::Identity(2, 2)).value ==
        doctest::Approx(0.7).epsilon(1e-6));

  CHECK_ERROR(nui_bound_12(1.0, RMatrix::Identity(2, 2), diag({1.5, 1.5})), ErrorCode::DeltaOutOfRange);
  CHECK_ERROR(nui_bound_12(1.0, RMatrix::Identity(2, 2), RMatrix::Identity(2, 2)),
              ErrorCode::NuisanceVarianceTooSmall);

  RMatrix full = RMatrix::Identity(3, 3);
  full(0, 1) = full(1, 0) = 0.2;
  CHECK_ERROR(nui_bound_12(full, 5.0 * RMatrix::Identity(2, 2)), ErrorCode::NotBlockDiagonal);
  full(0, 1) = full(1, 0) = 0.0;
  CHECK(nui_bound_12(full, 5.0 * RMatrix::Identity(2, 2)).value == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("nui_bound_21") {
  const RMatrix I2 = RMatrix::Identity(2, 2);
  const auto r = nui_bound_21(I2, I2, 1.0, 2.0);
  CHECK(r.component("parent_bound") == doctest::Approx(4.0));
  CHECK(r.value == doctest::Approx(8.0));
  CHECK(nui_bound_21(I2, I2, 1.0, 1e12).value == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(nui_bound_21(I2, I2, 1.5, 3.0).component("tradeoff") == doctest::Approx(4.0));
  CHECK(nui_bound_21(I2, RMatrix::Identity(3, 3), 2.0).value == doctest::Approx(8.0));
  CHECK_ERROR(nui_bound_21(I2, I2, 1.0, 1.0), ErrorCode::NuisanceVarianceTooSmall);
}

TEST_CASE("classical weight elimination examples") {
  const auto r = classical_weight_elimination(m2(2, 1, 1, 2), RMatrix::Identity(1, 1));
  CHECK(r.bound.value == doctest::Approx(1.5));
  CHECK(r.W_IN(0, 0) == doctest::Approx(-0.5));
  CHECK(r.direct == doctest::Approx(1.5));

  const auto bd = classical_weight_elimination(diag({2, 3, 4}), diag({1, 2}));
  CHECK(bd.bound.value == doctest::Approx(8.0));
  CHECK(bd.W_IN.cwiseAbs().maxCoeff() < 1e-15);

  std::mt19937_64 rng(59);
  for (int k = 0; k < 10; ++k) {
    const RMatrix J = oracle::random_spd(rng, 3);
    const RMatrix W = oracle::random_spd(rng, 1);
    const RMatrix M = J.inverse();
    const auto e = classical_weight_elimination(M, W);
    const double expected = (W * J.topLeftCorner(1, 1).inverse()).trace();
    CHECK(e.bound.value == doctest::Approx(expected).epsilon(1e-10));
    CHECK(min_eigenvalue(*e.bound.optimal_weights) >= -1e-10);
  }
}

TEST_CASE("classical weight elimination matches a grid search") {
  std::mt19937_64 rng(61);
  for (int k = 0; k < 10; ++k) {
    const RMatrix M = oracle::random_spd(rng, 3);
    const RMatrix W = oracle::random_spd(rng, 1);
    CHECK(std::abs(classical_weight_elimination(M, W).bound.value - oracle::grid_elimination(M, W)) < 1e-4);
  }
}

TEST_CASE("classical tradeoff residual is PSD for the efficient estimator") {
  std::mt19937_64 rng(67);
  const RMatrix J = oracle::random_spd(rng, 3);
  const RMatrix V = J.inverse() + RMatrix::Identity(3, 3);
  CHECK(classical_tradeoff_residual(V, J, 1)(0, 0) == doctest::Approx(1.0));
  CHECK_ERROR(classical_tradeoff_residual(J.inverse(), J, 1), ErrorCode::NuisanceVarianceTooSmall);
}

TEST_CASE("weight matrix validation") {
  CHECK(WeightMatrix::make(RMatrix::Identity(2, 2)).strict);
  CHECK_FALSE(WeightMatrix::make(diag({1, 0})).strict);
  CHECK_ERROR(WeightMatrix::make(diag({1, -1})), ErrorCode::NonPositiveWeight);
  CHECK_ERROR(WeightMatrix::make(m2(1, 0.5, 0, 1)), ErrorCode::NonHermitianInput);
}
