#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fatgraph {

enum class Errc {
    InvalidArgument,
    InvalidRational,
    ContractViolation,
    RejectP,
    RejectParity,
    RejectHeight,
    RejectEps,
    OutOfRange,
    DepthExceeded,
    Straddle,
    Unaligned,
    SweepTooLarge,
    CapTooCoarse,
    ResolutionMismatch,
    Io,
};

constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidRational: return "InvalidRational";
    case Errc::ContractViolation: return "ContractViolation";
    case Errc::RejectP: return "RejectP";
    case Errc::RejectParity: return "RejectParity";
    case Errc::RejectHeight: return "RejectHeight";
    case Errc::RejectEps: return "RejectEps";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::DepthExceeded: return "DepthExceeded";
    case Errc::Straddle: return "Straddle";
    case Errc::Unaligned: return "Unaligned";
    case Errc::SweepTooLarge: return "SweepTooLarge";
    case Errc::CapTooCoarse: return "CapTooCoarse";
    case Errc::ResolutionMismatch: return "ResolutionMismatch";
    case Errc::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace fatgraph
