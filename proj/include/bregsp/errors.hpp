#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bregsp {

// Base for every error raised by the library. Invalid arguments derive from
// std::invalid_argument instead so callers can catch them the usual way.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A dual vector that is not a subgradient of the generator at its primal point.
class InconsistentDual : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

class NoSaddlePoint : public Error {
 public:
  using Error::Error;
};

class DegenerateSample : public Error {
 public:
  using Error::Error;
};

class NumericalBreakdown : public Error {
 public:
  NumericalBreakdown(const std::string& what, std::size_t iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

class ScheduleViolation : public Error {
 public:
  ScheduleViolation(const std::string& condition, std::size_t iteration)
      : Error("schedule violates " + condition + " at k=" + std::to_string(iteration)),
        condition_(condition),
        iteration_(iteration) {}

  const std::string& condition() const noexcept { return condition_; }
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::string condition_;
  std::size_t iteration_;
};

}  // namespace bregsp
