#pragma once

#include <stdexcept>
#include <string>

namespace fujita {

enum class ErrorCode {
    InvalidArgument = 1,
    DimensionMismatch,
    GridMismatch,
    NonConvergence,
    InvariantViolation,
    RegimeMismatch,
    SmallnessUnmet,
    Vacuous,
    FitFailure,
    Io,
    Config,
};

const char* to_string(ErrorCode code) noexcept;

/// Error raised by every module. The code survives the C boundary as a status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace fujita
