#include "gsrelight/core/error.hpp"

#include <utility>

namespace gsr {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidT: return "InvalidT";
    case ErrorCode::SigmaZero: return "SigmaZero";
    case ErrorCode::OddDimensions: return "OddDimensions";
    case ErrorCode::DenoiserFailure: return "DenoiserFailure";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::Interrupted: return "Interrupted";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::ServerError: return "ServerError";
    case ErrorCode::UnknownJob: return "UnknownJob";
    case ErrorCode::BridgeFailure: return "BridgeFailure";
    case ErrorCode::MissingSource: return "MissingSource";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::BoxTooSmall: return "BoxTooSmall";
    case ErrorCode::MissingScene: return "MissingScene";
    case ErrorCode::CameraMismatch: return "CameraMismatch";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::ZeroVolumeAll: return "ZeroVolumeAll";
    case ErrorCode::Usage: return "Usage";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(std::move(detail)) {}

void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace gsr
