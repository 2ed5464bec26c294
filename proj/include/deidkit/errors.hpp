#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deidkit {

/// Malformed or inconsistent caller input. CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// External service failed (transport, exhausted retries, missing replay fixture). CLI exit code 3.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The service answered, but not in a form we accept (bad status, unparseable judge reply).
class ProtocolError : public BackendError {
 public:
  ProtocolError(const std::string& what, int status = 0) : BackendError(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class RangeError : public InputError {
 public:
  using InputError::InputError;
};

class NotFoundError : public InputError {
 public:
  using InputError::InputError;
};

class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace deidkit
