#pragma once

#include <stdexcept>
#include <string>

namespace danmaku {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied something malformed: bad shape, out-of-range field,
/// unreadable input. The CLI maps these to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A NaN or Inf showed up in a value or gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A template failed to emit enough events before the frame cap.
class StallError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace danmaku
