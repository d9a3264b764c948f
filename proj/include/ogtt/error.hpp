#ifndef OGTT_ERROR_HPP
#define OGTT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ogtt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A non-finite state appeared while integrating; carries the time of the failing step.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class SingularTransform : public Error {
 public:
  using Error::Error;
};

class SamplerInitError : public Error {
 public:
  using Error::Error;
};

/// IAT is undefined for a series with zero variance.
class UndefinedIat : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class InvalidScore : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Line is 1-based, 0 when the error concerns the whole file.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line) : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ogtt

#endif  // OGTT_ERROR_HPP
