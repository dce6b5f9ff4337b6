#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qendy {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (dimension mismatch, bad index, empty data).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Function evaluated outside its domain (e.g. 1/0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: missing coordinate functions, unknown keys, bad G.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure inside a numerical kernel (eigen-solver, SVD).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Expression text that does not conform to the grammar.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::string expected, const std::string& what)
      : Error(what), offset_(offset), expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

/// Integration produced a non-finite state.
class BlowupError : public Error {
 public:
  BlowupError(std::size_t step, const std::string& what) : Error(what), step_(step) {}

  /// Index of the step whose result was non-finite (1-based step count).
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace qendy
