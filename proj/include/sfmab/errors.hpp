#ifndef SFMAB_ERRORS_HPP
#define SFMAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sfmab {

/// An argument lies outside the domain of the function being evaluated.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A scalar root-finder did not reach its tolerance within the iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A lower-bound certificate was asked about a point it does not cover.
class ValidityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Caller violated a documented precondition (bad config, bad sequence).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A known-scale baseline observed a loss larger than the scale it was tuned for.
class ScaleViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be read or written; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sfmab

#endif  // SFMAB_ERRORS_HPP
