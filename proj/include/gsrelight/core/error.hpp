#pragma once

#include <stdexcept>
#include <string>

namespace gsr {

enum class ErrorCode {
    MalformedFile,
    InvariantViolation,
    IoFailure,
    EmptyRange,
    DegenerateCovariance,
    ShapeMismatch,
    InvalidT,
    SigmaZero,
    OddDimensions,
    DenoiserFailure,
    NonFiniteLoss,
    Interrupted,
    Timeout,
    ProtocolError,
    ServerError,
    UnknownJob,
    BridgeFailure,
    MissingSource,
    EmptyMask,
    BoxTooSmall,
    MissingScene,
    CameraMismatch,
    EmptyMesh,
    ZeroVolumeAll,
    Usage,
};

[[nodiscard]] const char* to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string detail = {});

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    /// Machine-readable sub-code, e.g. the server's error code for ServerError.
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) {
        fail(code, message);
    }
}

} // namespace gsr
