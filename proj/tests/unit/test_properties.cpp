#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "qnuis/properties.hpp"

using namespace qnuis;

TEST_CASE("property registry") {
  const auto names = property_names();
  CHECK(names.size() >= 20);
  for (const auto& n : names) CHECK(property_tolerance(n) >= 0.0);
  CHECK(property_tolerance("linalg.sld_solution") == doctest::Approx(1e-9));
  CHECK_ERROR(property_tolerance("nope"), ErrorCode::InvalidArgument);
}

TEST_CASE("exclusion and overrides") {
  PropertyConfig cfg;
  for (const auto& n : property_names())
    if (n != "bounds.nagaoka_exceeds_sld") cfg.exclude.insert(n);
  auto r = run_properties(cfg);
  REQUIRE(r.size() == 1);
  CHECK(r[0].pass);
  CHECK(r[0].samples > 0);

  cfg.tolerance_overrides["bounds.nagaoka_exceeds_sld"] = -1.0;
  r = run_properties(cfg);
  CHECK_FALSE(r[0].pass);

  cfg.exclude.insert("unknown.property");
  CHECK_ERROR(run_properties(cfg), ErrorCode::InvalidArgument);
}

TEST_CASE("results are deterministic for a seed") {
  PropertyConfig cfg;
  cfg.seed = 42;
  cfg.sample_scale = 0.2;
  const auto a = run_properties(cfg), b = run_properties(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].violation == b[i].violation);
    CHECK(a[i].samples == b[i].samples);
  }
}
