// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace phipsi {

// Each failure class maps to its own CLI exit code (see tools/phipsi.cpp).

/// Caller passed a value outside the operation's precondition.
struct argument_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A real-valued quantity is undefined at the requested point (e.g. log_3 x for x <= e^e).
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

/// The request would exceed the configured memory budget.
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A search or factoring budget ran out before an answer was found.
struct budget_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace phipsi
