#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <json.hpp>

#include "mass/certification.hpp"

namespace mass {

struct Report {
    nlohmann::ordered_json document;
    std::string summary;
};

/// Deterministic: identical ledgers and decisions give byte-identical output.
Report emit_report(const CampaignLedger& ledger, std::span<const GateDecision> decisions);

/// Decisions against the built-in criteria for every stage.
std::vector<GateDecision> evaluate_all_stages(const CampaignLedger& ledger);

/// Writes the document to `path` (2-space indented, trailing newline) and the
/// summary next to it with a `.txt` extension. Throws Error{SinkUnavailable}.
void write_report(const Report& report, const std::filesystem::path& path);

std::string report_text(const Report& report);

}  // namespace mass
