#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace polya {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  enum class Kind { NonStochasticRow, NegativeWeight, BlockLeak, Malformed };

  ValidationError(Kind kind, std::size_t row, double value, const std::string& what)
      : Error(what), kind_(kind), row_(row), value_(value) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t row() const noexcept { return row_; }
  /// Row sum for NonStochasticRow, offending weight otherwise.
  double value() const noexcept { return value_; }

 private:
  Kind kind_;
  std::size_t row_;
  double value_;
};

class ColorOutOfSpace : public Error { using Error::Error; };
class InfiniteSupport : public Error { using Error::Error; };
class NotErgodic : public Error { using Error::Error; };
class NegativeWeight : public Error { using Error::Error; };
class EmptyStructure : public Error { using Error::Error; };
class TooLarge : public Error { using Error::Error; };
class IrrationalWeights : public Error { using Error::Error; };
class UnsupportedKernel : public Error { using Error::Error; };
class TooFewSamples : public Error { using Error::Error; };
class EmptyInput : public Error { using Error::Error; };
class SupportMismatch : public Error { using Error::Error; };
class DegenerateFit : public Error { using Error::Error; };
class UnknownSuite : public Error { using Error::Error; };

/// Configuration problem; `path` names the offending field (e.g. "kernel.rows[1]").
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace polya
