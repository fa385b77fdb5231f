#pragma once

#include <doctest.h>

#include <Eigen/Dense>
#include <functional>

#include "qnuis/errors.hpp"

namespace testing {

inline qnuis::ErrorCode error_code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const qnuis::Error& e) {
    return e.code();
  }
  FAIL("expected a qnuis::Error");
  return qnuis::ErrorCode::InvalidArgument;
}

template <typename A, typename B>
double max_abs_diff(const A& a, const B& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testing

#define CHECK_ERROR(expr, code) CHECK(testing::error_code_of([&] { (void)(expr); }) == (code))
