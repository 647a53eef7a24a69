#pragma once

#include <stdexcept>
#include <string>

namespace pokeai {

// Numeric values are part of the C API and the CLI exit status.
enum class ErrorCode : int {
    Internal = 1,
    InvalidArgument = 2,
    Data = 3,
    Io = 4,
    Endpoint = 5,
    ReplayMiss = 6,
    InputClosed = 7,
    Contract = 8,
    Deadlock = 9,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class DataError : public Error {
public:
    explicit DataError(const std::string& message) : Error(ErrorCode::Data, message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error(ErrorCode::Io, message) {}
};

// Broken precondition inside the engine. Callers are expected to validate
// upstream (valid_actions, schema checks), so reaching this is a bug.
class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& message)
        : Error(ErrorCode::Contract, message) {}
};

inline void expects(bool condition, const char* what) {
    if (!condition) throw ContractViolation(what);
}

}  // namespace pokeai
