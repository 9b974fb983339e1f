#pragma once

#include <stdexcept>
#include <string>

namespace lfdepth {

// Base of every library error. exit_code() is the process status the CLI
// reports for this class of failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

// Missing or inconsistent light-field layout (view count, view sizes, directory).
class StructureError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// Malformed file contents (PFM/PNG headers, short payloads).
class FormatError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class CalibrationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

// Nothing to compute on: all weights zero, empty evaluation set, empty stack.
class NoDataError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 5; }
};

class IndexError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// Image too small for the requested descriptor support or pyramid depth.
class SizeError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// Invalid synthetic scene description.
class SpecError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Unknown configuration key or unparsable value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lfdepth
