#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace surprisal {

/// Invalid input: bad parameters, arity mismatch, malformed data.
/// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure (optimizer, IRLS) failed to produce a usable result.
/// Carries free-form diagnostics such as the best iterate or an iteration trace.
/// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::vector<std::string> diagnostics = {})
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace detail
}  // namespace surprisal
