#ifndef USCRL_ERROR_HPP_
#define USCRL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace uscrl {

// Base of every error thrown by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied configuration (bad spec, schema violation, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. The message names the offending field.
class FormatError : public Error {
 public:
  using Error::Error;
};

// An operation was called outside its domain (empty class, k = 0, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// An enumeration would exceed the configured cap. Carries the exact count
// as a decimal string because it may not fit in 64 bits.
class SizeError : public PreconditionError {
 public:
  SizeError(const std::string& what, std::string exact_count)
      : PreconditionError(what), exact_count_(std::move(exact_count)) {}
  const std::string& exact_count() const noexcept { return exact_count_; }

 private:
  std::string exact_count_;
};

// Non-finite values, failed iterative solvers, diverging training.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace uscrl

#endif  // USCRL_ERROR_HPP_
