#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mass {

enum class Errc {
    // ais
    ChecksumMismatch,
    MalformedSentence,
    PayloadTooShort,
    IncompleteGroup,
    InconsistentGroup,
    // kinematics
    InfeasibleBudget,
    ZeroRelativeSpeed,
    InvalidBudget,
    NegativeDt,
    // navigation
    NoPathFound,
    InvalidEndpoints,
    UnknownPlanner,
    // failover
    NoPickupPoints,
    // certification
    ScenarioLoadError,
    EmptyLedger,
    SinkUnavailable,
    LedgerCorrupt,
    // console
    NoActiveSimulation,
    HelmWithoutOverride,
    MalformedCommand,
    SubscriberGone,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace mass
