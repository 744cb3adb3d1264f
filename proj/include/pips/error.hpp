#pragma once

#include <stdexcept>
#include <string>

namespace pips {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (shape, range, ordering).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotFitted : public Error {
 public:
  NotFitted() : Error("model is not fitted") {}
};

class SingularKernel : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class Divergence : public Error {
 public:
  Divergence(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

/// Malformed input file. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0) : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace pips
