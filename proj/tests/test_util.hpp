#pragma once

#include "portsheaf/errors.hpp"
#include "portsheaf/trajectory.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <string>

namespace portsheaf::test {

/// Runs f and returns the kind of the portsheaf::Error it throws. Fails the
/// test when nothing (or something else) is thrown.
inline ErrorKind thrown_kind(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  } catch (const std::exception& e) {
    ADD_FAILURE() << "unexpected exception: " << e.what();
    return ErrorKind::IoError;
  }
  ADD_FAILURE() << "no exception thrown";
  return ErrorKind::IoError;
}

#define EXPECT_ERROR_KIND(expr, kind) \
  EXPECT_EQ(::portsheaf::test::thrown_kind([&] { (void)(expr); }), (kind))

/// Samples f(t) at nodes 0, h, ..., n h into a one-channel trajectory.
inline Trajectory sampled(const std::function<double(double)>& f, double h, Index last,
                          double shift = 0.0, const std::string& label = "x") {
  Eigen::MatrixXd v(last + 1, 1);
  for (Index j = 0; j <= last; ++j) v(j, 0) = f(static_cast<double>(j) * h);
  return Trajectory(h, shift, v, {label});
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace portsheaf::test
