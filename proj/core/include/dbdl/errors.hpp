#pragma once

#include <stdexcept>
#include <string>

namespace dbdl {

/// Shapes of two operands do not agree, or a size precondition fails.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A file was readable but its content is malformed, truncated or of the
/// wrong version.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure inside an optimization loop (non-finite loss, empty
/// system).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace dbdl
