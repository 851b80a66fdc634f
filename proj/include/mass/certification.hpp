#pragma once

// Campaign ledger, certification metrics and stage gates.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mass/simulation.hpp"
#include "mass/stage.hpp"

namespace mass {

struct LedgerTotals {
    std::uint64_t runs = 0;
    double miles = 0.0;
    std::uint64_t port_operations = 0;
    std::uint64_t violations = 0;
    std::uint64_t collisions = 0;
    std::uint64_t nav_error_steps = 0;
    std::uint64_t total_steps = 0;
    std::uint64_t failure_runs = 0;  ///< runs with a Level-1 or Level-2 event
    std::uint64_t failed_runs = 0;   ///< runs that did not pass (see RunResult::failed)
    double critical_downtime = 0.0;
    double duration = 0.0;

    static LedgerTotals of(const RunResult& r);
    LedgerTotals& operator+=(const LedgerTotals& o);
    bool operator==(const LedgerTotals&) const = default;
};

struct VersionEpoch {
    std::string software_version;
    std::uint64_t runs = 0;
    double miles = 0.0;
};

struct ResetRecord {
    std::string from_version;
    std::string to_version;
    std::uint64_t discarded_runs = 0;
    double discarded_miles = 0.0;
};

struct CampaignLedger {
    std::string software_version;
    std::vector<RunResult> runs;
    LedgerTotals totals;
    /// Every version that has held the ledger, oldest first; the last is current.
    std::vector<VersionEpoch> history;
    std::vector<ResetRecord> resets;
};

/// Appends under the same version; a different version discards the ledger and
/// starts over with this run alone.
CampaignLedger record_run(CampaignLedger ledger, const RunResult& result, LogSink* log = nullptr);

struct Metrics {
    double nav_error_rate = 0.0;
    double system_failure_rate = 0.0;
    double availability = 1.0;
    std::uint64_t collisions = 0;
};

/// Throws Error{EmptyLedger} when no steps have been recorded.
Metrics compute_metrics(const CampaignLedger& ledger);

struct StageCriteria {
    Stage stage = Stage::PATH_SIM;
    double min_miles = 0.0;
    std::uint64_t min_port_operations = 0;
    std::optional<std::uint64_t> max_collisions;
    std::optional<std::uint64_t> max_failed_runs;
    std::optional<double> max_nav_error_rate;
    std::optional<double> max_system_failure_rate;
    std::optional<double> min_availability;
};

/// Built-in gate table.
StageCriteria builtin_criteria(Stage stage);

/// Criteria document: {"stage": ..., "min_miles": ..., ...}; absent keys fall back
/// to the built-in entry for the stage. Throws Error{ScenarioLoadError}.
StageCriteria load_criteria(const nlohmann::json& doc);

struct GateDecision {
    Stage stage = Stage::PATH_SIM;
    bool pass = false;
    std::vector<std::string> unmet;
    StageCriteria criteria;
};

GateDecision evaluate_stage(const CampaignLedger& ledger, const StageCriteria& criteria);

/// Append-only JSONL: one {"run": ...} line per recorded run, {"reset": ...} when
/// the version changes. Throws Error{SinkUnavailable}.
void append_to_ledger_file(const std::filesystem::path& path, const CampaignLedger& before, const RunResult& result);

/// Replays a ledger file. A missing file is an empty ledger. Throws Error{LedgerCorrupt}.
CampaignLedger load_ledger(const std::filesystem::path& path);

}  // namespace mass
