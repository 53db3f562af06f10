#pragma once

#include <stdexcept>
#include <string>

namespace sscn {

// Bad user input: config keys, sampler parameters, incompatible options.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class UnsupportedFeature : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Root finder did not converge, singular system, runaway line search...
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cubic model with H = M = 0 and nonzero gradient has no minimizer.
class UnboundedModel : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace sscn
