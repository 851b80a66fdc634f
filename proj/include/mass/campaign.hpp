#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mass/certification.hpp"
#include "mass/log.hpp"
#include "mass/report.hpp"

namespace mass {

/// {"id": ..., "scenarios": [paths], "stage": optional, "ledger": optional path, "report": optional path}.
/// Paths are relative to the campaign file.
struct CampaignSpec {
    std::string id;
    std::vector<std::filesystem::path> scenarios;
    std::optional<Stage> stage;
    std::optional<std::filesystem::path> ledger;
    std::optional<std::filesystem::path> report;
};

/// Throws Error{ScenarioLoadError}.
CampaignSpec load_campaign(const std::filesystem::path& path);

struct CampaignOutcome {
    std::vector<RunResult> results;
    CampaignLedger ledger;
    std::vector<GateDecision> decisions;
    Report report;
};

/// Runs every scenario (in parallel, `threads` = 0 picks the hardware count),
/// records results in file order into `ledger`, and evaluates all stage gates.
CampaignOutcome run_campaign(const std::vector<ScenarioSpec>& scenarios, CampaignLedger ledger = {},
                             unsigned threads = 0, LogSink* log = nullptr);

/// Loads the scenarios and the ledger file (when set), runs, appends to the
/// ledger file and writes the report (when set).
CampaignOutcome run_campaign_file(const CampaignSpec& spec, unsigned threads = 0, LogSink* log = nullptr);

}  // namespace mass
