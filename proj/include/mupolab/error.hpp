#pragma once

#include <stdexcept>
#include <string>

namespace mupolab {

enum class ErrorCode {
    InvalidGeometry,
    NotOnBoundary,
    DepthExceeded,
    DomainError,
    UnboundedEvenQuotients,
    InvalidC,
    UnsupportedAlpha,
    HoleInIsland,
    NotAMupoOrientation,
    TailNotConverged,
    DegenerateZeta,
    OrderingAmbiguous,
    InvalidConfig,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::NotOnBoundary: return "NotOnBoundary";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::UnboundedEvenQuotients: return "UnboundedEvenQuotients";
    case ErrorCode::InvalidC: return "InvalidC";
    case ErrorCode::UnsupportedAlpha: return "UnsupportedAlpha";
    case ErrorCode::HoleInIsland: return "HoleInIsland";
    case ErrorCode::NotAMupoOrientation: return "NotAMupoOrientation";
    case ErrorCode::TailNotConverged: return "TailNotConverged";
    case ErrorCode::DegenerateZeta: return "DegenerateZeta";
    case ErrorCode::OrderingAmbiguous: return "OrderingAmbiguous";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace mupolab
