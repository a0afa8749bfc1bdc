#pragma once

#include <stdexcept>
#include <string>

namespace pinn {

/// Invalid configuration: mismatched dimensions, bad sampler settings,
/// malformed files. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite value produced during a numeric computation. `context`
/// identifies where (iteration, point id) it happened.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, std::string context = {})
      : std::runtime_error(context.empty() ? what : what + " [" + context + "]"),
        context_(std::move(context)) {}

  const std::string& context() const { return context_; }

 private:
  std::string context_;
};

}  // namespace pinn
