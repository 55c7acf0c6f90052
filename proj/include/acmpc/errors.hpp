#pragma once

#include <stdexcept>
#include <string>

namespace acmpc {

/// Raised for malformed arguments, inconsistent dimensions and bad configuration.
class InputError : public std::invalid_argument {
public:
  explicit InputError(const std::string &what) : std::invalid_argument(what) {}
};

/// Raised when a least-squares regressor matrix does not have full column rank.
class RankDeficientError : public std::runtime_error {
public:
  RankDeficientError(std::string equation, const std::string &what)
      : std::runtime_error(what), equation_(std::move(equation)) {}

  const std::string &equation() const noexcept { return equation_; }

private:
  std::string equation_;
};

} // namespace acmpc
