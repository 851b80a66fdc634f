#include "mass/error.hpp"

namespace mass {

std::string_view errc_name(Errc code) {
    switch (code) {
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::MalformedSentence: return "MalformedSentence";
    case Errc::PayloadTooShort: return "PayloadTooShort";
    case Errc::IncompleteGroup: return "IncompleteGroup";
    case Errc::InconsistentGroup: return "InconsistentGroup";
    case Errc::InfeasibleBudget: return "InfeasibleBudget";
    case Errc::ZeroRelativeSpeed: return "ZeroRelativeSpeed";
    case Errc::InvalidBudget: return "InvalidBudget";
    case Errc::NegativeDt: return "NegativeDt";
    case Errc::NoPathFound: return "NoPathFound";
    case Errc::InvalidEndpoints: return "InvalidEndpoints";
    case Errc::UnknownPlanner: return "UnknownPlanner";
    case Errc::NoPickupPoints: return "NoPickupPoints";
    case Errc::ScenarioLoadError: return "ScenarioLoadError";
    case Errc::EmptyLedger: return "EmptyLedger";
    case Errc::SinkUnavailable: return "SinkUnavailable";
    case Errc::LedgerCorrupt: return "LedgerCorrupt";
    case Errc::NoActiveSimulation: return "NoActiveSimulation";
    case Errc::HelmWithoutOverride: return "HelmWithoutOverride";
    case Errc::MalformedCommand: return "MalformedCommand";
    case Errc::SubscriberGone: return "SubscriberGone";
    }
    return "Unknown";
}

}  // namespace mass
