#pragma once

#include <stdexcept>
#include <string>

namespace pension {

// Input outside the domain on which a curve, surface or grid is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed argument combination (a > b, mismatched grids, bad parameters).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The layer series did not reach the requested tolerance within nu_cap layers.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, int layers, double residual)
      : std::runtime_error(what), layers_(layers), residual_(residual) {}
  int layers() const noexcept { return layers_; }
  double residual() const noexcept { return residual_; }

 private:
  int layers_;
  double residual_;
};

// f(y|t) requested where the marriage probability is below the floor.
class UndefinedConditionalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pension
