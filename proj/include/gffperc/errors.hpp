#pragma once

#include <stdexcept>
#include <string>

namespace gffperc {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside an operation's documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// n·d odd: no d-regular graph on n vertices exists.
class ParityError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Rejection sampling ran out of attempts.
class RetryLimitError : public Error {
 public:
  using Error::Error;
};

/// Dense table requested for a graph above the configured size cap.
class SizeCapError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed (singular system, not PSD, no convergence).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace gffperc
