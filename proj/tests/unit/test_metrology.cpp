#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "qnuis/metrology.hpp"

using namespace qnuis;

namespace {
NoiseModelSpec spec(int variant, double omega, double b2, double gamma, Eigen::Vector3d s0) {
  NoiseModelSpec s;
  s.variant = variant;
  s.omega = omega;
  s.b2 = b2;
  s.gamma_corr = gamma;
  s.s0 = s0;
  return s;
}
}  // namespace

TEST_CASE("variant-2 kernels") {
  const auto k = kernels(spec(2, 1000, 100, 10, Eigen::Vector3d::UnitX()), 1.0);
  CHECK(k.gamma3 == doctest::Approx(10.0));
  CHECK(k.gamma1 == doctest::Approx(1000.0 / 1000100.0));
  CHECK(k.delta_omega == doctest::Approx(1e5 / 1000100.0));
}

TEST_CASE("variant-1 integrals") {
  const auto s1 = spec(1, 1000, 100, 10, Eigen::Vector3d::UnitX());
  const auto d0 = decay_state(s1, 0.0);
  CHECK(d0.Gamma1 == 0.0);
  CHECK(d0.Gamma3 == 0.0);
  CHECK(d0.Omega == 0.0);

  // Gamma t = 20: the time-dependent kernels have reached their limits. The
  // remainder is e^{-Gamma t} sqrt(Gamma^2 + omega^2) / Gamma relative.
  const auto s3 = spec(1, 1.0, 1.0, 1.0, Eigen::Vector3d::UnitX());
  auto s2 = s3;
  s2.variant = 2;
  const auto k1 = kernels(s3, 20.0), k2 = kernels(s2, 20.0);
  CHECK(std::abs(k1.gamma1 - k2.gamma1) <= 1e-8 * k2.gamma1);
  CHECK(std::abs(k1.gamma3 - k2.gamma3) <= 1e-8 * k2.gamma3);
  CHECK(std::abs(k1.delta_omega - k2.delta_omega) <= 1e-8 * k2.delta_omega);
}

TEST_CASE("evolve_bloch") {
  const Eigen::Vector3d s0(std::sqrt(0.91), 0.0, 0.3);
  const auto s = spec(1, 2.0, 0.5, 1.0, s0);
  CHECK((evolve_bloch(s, 0.0) - s0).norm() < 1e-15);

  const auto free = spec(1, 2.0, 0.0, 1.0, s0);
  for (double t : {0.1, 1.0, 10.0}) CHECK(evolve_bloch(free, t).norm() == doctest::Approx(s0.norm()));

  const auto v3 = spec(3, 2.0, 0.5, 1.0, Eigen::Vector3d::UnitX());
  for (double t : {0.1, 1.0, 5.0}) {
    const Eigen::Vector3d x = evolve_bloch(v3, t);
    CHECK(x(2) == 0.0);
    CHECK(x.norm() < 1.0);
  }

  for (double t : {0.01, 0.3, 2.0, 8.0}) CHECK(evolve_bloch(s, t).norm() <= s0.norm() + 1e-12);
}

TEST_CASE("variant-3 Fisher information") {
  // gamma = b2 / Gamma = 0.5, t = 1: gamma t = 0.5.
  const auto v3 = spec(3, 2.0, 0.5, 1.0, Eigen::Vector3d::UnitX());
  const auto p = fisher_point(v3, 1.0);
  CHECK(p.status == PointStatus::Ok);
  CHECK(p.g11 == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(p.g11_partial == doctest::Approx(p.g11).epsilon(1e-12));
}

TEST_CASE("noise-free limit") {
  const double r = 0.8;
  const auto s = spec(1, 2.0, 0.0, 1.0, Eigen::Vector3d(r, 0, 0));
  for (double t : {0.5, 2.0}) CHECK(fisher_point(s, t).g11 == doctest::Approx(r * r * t * t).epsilon(1e-10));
}

TEST_CASE("degenerate cases are reported") {
  const auto z0 = spec(1, 2.0, 0.5, 1.0, Eigen::Vector3d::UnitX());
  const auto p = fisher_point(z0, 1.0);
  CHECK(p.status == PointStatus::SingularFisher);
  CHECK(std::isnan(p.g11_partial));

  const auto pure = spec(2, 2.0, 0.0, 1.0, Eigen::Vector3d::UnitX());
  CHECK(fisher_point(pure, 1.0).status == PointStatus::RankDeficientState);
  CHECK(to_string(PointStatus::Ok) == "ok");
}

TEST_CASE("partial information never exceeds full information") {
  for (const auto& name : noise_preset_names())
    for (int variant : {1, 2}) {
      const auto s = noise_preset(name, variant);
      const auto ts = fisher_time_series(s, default_time_grid(s));
      for (std::size_t i = 0; i < ts.points.size(); ++i) {
        if (ts.points[i].status != PointStatus::Ok) continue;
        CHECK(ts.points[i].log_g11_partial <= ts.points[i].log_g11 + 1e-9);
      }
    }
}

TEST_CASE("memory effect in fig1c") {
  const auto s1 = noise_preset("fig1c", 1), s2 = noise_preset("fig1c", 2);
  const double t = 1e-2 / s1.gamma_corr;
  const auto p1 = fisher_point(s1, t), p2 = fisher_point(s2, t);
  REQUIRE(p1.status == PointStatus::Ok);
  REQUIRE(p2.status == PointStatus::Ok);
  CHECK(p1.log_g11_partial > p2.log_g11_partial);
}

TEST_CASE("closed-form derivatives match finite differences") {
  const auto s = noise_preset("fig1b", 1);
  for (double gt : {0.05, 1.0, 5.0}) {
    const double t = gt / s.gamma_corr;
    const auto exact = bloch_derivatives(s, t), fd = bloch_derivatives_fd(s, t);
    for (Eigen::Index j = 0; j < exact.cols(); ++j)
      CHECK((exact.col(j) - fd.col(j)).norm() <= 1e-6 * std::max(1e-300, exact.col(j).norm()));
  }
}

TEST_CASE("time grids and noise-model validation") {
  const auto g = time_grid(1e-3, 10.0, 5, Spacing::Log);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == doctest::Approx(1e-3));
  CHECK(g.back() == doctest::Approx(10.0));
  CHECK(g[1] / g[0] == doctest::Approx(g[2] / g[1]));
  CHECK(time_grid(1.0, 2.0, 1, Spacing::Linear) == std::vector<double>{1.0});
  CHECK_ERROR(time_grid(0.0, 1.0, 3, Spacing::Log), ErrorCode::InvalidArgument);

  auto bad = spec(4, 1.0, 0.1, 1.0, Eigen::Vector3d::UnitX());
  CHECK_ERROR(bad.validate(), ErrorCode::InvalidSpec);
  CHECK_ERROR(noise_preset("fig9", 1), ErrorCode::InvalidSpec);
  const auto d = default_time_grid(noise_preset("fig1a", 1));
  CHECK(d.size() == 200);
  CHECK(d.back() == doctest::Approx(30.0 / noise_preset("fig1a", 1).gamma_corr));
}
