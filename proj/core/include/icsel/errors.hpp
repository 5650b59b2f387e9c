#pragma once

#include <stdexcept>
#include <string>

namespace icsel {

class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Violated precondition or malformed input data. Maps to exit code 1.
class ContractError : public Error {
  public:
    using Error::Error;
};

/// Filesystem or environment failure. Maps to exit code 2.
class IoError : public Error {
  public:
    using Error::Error;
};

/// Corrupt or mismatched on-disk artifact (index file, fingerprint).
class IntegrityError : public IoError {
  public:
    using IoError::IoError;
};

/// Transport-level failure talking to a generation endpoint.
class RemoteError : public IoError {
  public:
    RemoteError(const std::string& msg, int status_code = 0)
        : IoError(msg), status(status_code) {}

    int status;  // HTTP status, 0 when the request never completed
};

/// Prompt cannot be made to fit the token budget.
class BudgetError : public ContractError {
  public:
    using ContractError::ContractError;
};

}  // namespace icsel
