#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace isap {

/// Raised when an exhaustive computation would exceed its configured budget.
/// `attempted` is the size that was reached (nodes visited or states counted)
/// when the limit tripped.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, std::uint64_t attempted, std::uint64_t limit)
      : std::runtime_error(what + " (attempted " + std::to_string(attempted) + ", limit " +
                           std::to_string(limit) + ")"),
        attempted_(attempted),
        limit_(limit) {}

  std::uint64_t attempted() const noexcept { return attempted_; }
  std::uint64_t limit() const noexcept { return limit_; }

 private:
  std::uint64_t attempted_;
  std::uint64_t limit_;
};

/// An operation was called with arguments outside its contract.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical diagnostic failed (estimator dominated by a single sample,
/// bracketing failure, tail bound violated, ...).
class NumericalDiagnostic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace isap
