#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "qnuis/tolerances.hpp"

namespace qnuis {

/// Configuration of the property suites run by `qnuis validate`.
struct PropertyConfig {
  std::uint64_t seed = 7;
  /// Multiplies every per-property sample count (at least one sample is kept).
  double sample_scale = 1.0;
  /// Overrides the threshold of a property by its name.
  std::map<std::string, double> tolerance_overrides;
  std::set<std::string> exclude;
  Tolerances tol = default_tolerances();
};

struct PropertyResult {
  std::string name;
  bool pass = false;
  /// Worst observed violation; the property holds when violation <= tolerance
  /// (or < tolerance for strict properties).
  double violation = 0.0;
  double tolerance = 0.0;
  bool strict = false;
  long samples = 0;
  std::string detail;
  double seconds = 0.0;
};

std::vector<std::string> property_names();

/// Default threshold of a named property; InvalidArgument if unknown.
double property_tolerance(const std::string& name);

/// Runs all properties not excluded. Unknown names in overrides or exclude
/// throw InvalidArgument.
std::vector<PropertyResult> run_properties(const PropertyConfig& cfg);

}  // namespace qnuis
