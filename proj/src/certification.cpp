#include "mass/certification.hpp"

#include <fstream>

#include "mass/error.hpp"

namespace mass {

using nlohmann::json;
using nlohmann::ordered_json;

LedgerTotals LedgerTotals::of(const RunResult& r) {
    LedgerTotals t;
    t.runs = 1;
    t.miles = r.miles;
    t.port_operations = r.port_operations;
    t.violations = r.violations.size();
    t.collisions = r.collisions;
    t.nav_error_steps = r.nav_error_steps;
    t.total_steps = r.total_steps;
    t.failure_runs = r.had_failover_event() ? 1 : 0;
    t.failed_runs = r.failed() ? 1 : 0;
    t.critical_downtime = r.critical_downtime;
    t.duration = r.duration;
    return t;
}

LedgerTotals& LedgerTotals::operator+=(const LedgerTotals& o) {
    runs += o.runs;
    miles += o.miles;
    port_operations += o.port_operations;
    violations += o.violations;
    collisions += o.collisions;
    nav_error_steps += o.nav_error_steps;
    total_steps += o.total_steps;
    failure_runs += o.failure_runs;
    failed_runs += o.failed_runs;
    critical_downtime += o.critical_downtime;
    duration += o.duration;
    return *this;
}

CampaignLedger record_run(CampaignLedger ledger, const RunResult& result, LogSink* log) {
    if (!ledger.runs.empty() && ledger.software_version != result.software_version) {
        ResetRecord reset{ledger.software_version, result.software_version, ledger.totals.runs, ledger.totals.miles};
        log_line(log, "ledger reset: software " + reset.from_version.substr(0, 12) + " -> " +
                          reset.to_version.substr(0, 12) + ", discarded " + std::to_string(reset.discarded_runs) +
                          " runs");
        ledger.resets.push_back(std::move(reset));
        ledger.runs.clear();
        ledger.totals = {};
    }
    if (ledger.history.empty() || ledger.history.back().software_version != result.software_version) {
        ledger.history.push_back({result.software_version, 0, 0.0});
    }
    ledger.software_version = result.software_version;
    ledger.runs.push_back(result);
    ledger.totals += LedgerTotals::of(result);
    ledger.history.back().runs += 1;
    ledger.history.back().miles += result.miles;
    return ledger;
}

Metrics compute_metrics(const CampaignLedger& ledger) {
    const auto& t = ledger.totals;
    if (t.runs == 0 || t.total_steps == 0) throw Error(Errc::EmptyLedger, "no recorded steps");
    Metrics m;
    m.nav_error_rate = static_cast<double>(t.nav_error_steps) / static_cast<double>(t.total_steps);
    m.system_failure_rate = static_cast<double>(t.failure_runs) / static_cast<double>(t.runs);
    m.availability = t.duration > 0.0 ? 1.0 - t.critical_downtime / t.duration : 1.0;
    m.collisions = t.collisions;
    return m;
}

StageCriteria builtin_criteria(Stage stage) {
    StageCriteria c;
    c.stage = stage;
    switch (stage) {
    case Stage::PATH_SIM:
    case Stage::HIL:
        c.min_miles = 5000.0;
        c.max_failed_runs = 0;
        break;
    case Stage::INITIAL_TRIALS:
        c.min_miles = 15000.0;
        c.max_failed_runs = 0;
        break;
    case Stage::SMALL_CRAFT:
        c.min_miles = 15000.0;
        c.min_port_operations = 150;
        c.max_collisions = 0;
        c.max_nav_error_rate = 0.001;
        c.max_system_failure_rate = 0.01;
        c.min_availability = 0.999;
        break;
    case Stage::MEDIUM_SHIP:
        c.min_port_operations = 150;
        c.max_collisions = 0;
        c.max_nav_error_rate = 0.0001;
        c.max_system_failure_rate = 0.001;
        c.min_availability = 0.9999;
        break;
    case Stage::IMO:
        c.min_miles = 50000.0;
        c.max_collisions = 0;
        c.max_nav_error_rate = 0.00001;
        c.max_system_failure_rate = 0.0005;
        c.min_availability = 0.99999;
        break;
    }
    return c;
}

StageCriteria load_criteria(const json& doc) {
    auto fail = [](const std::string& what) -> StageCriteria { throw Error(Errc::ScenarioLoadError, what); };
    if (!doc.is_object() || !doc.contains("stage") || !doc.at("stage").is_string()) {
        return fail("criteria: missing 'stage'");
    }
    const auto stage = parse_stage(doc.at("stage").get<std::string>());
    if (!stage) return fail("criteria: unknown stage " + doc.at("stage").dump());
    StageCriteria c = builtin_criteria(*stage);
    try {
        for (const auto& [key, v] : doc.items()) {
            if (key == "stage") continue;
            if (key == "min_miles") {
                c.min_miles = v.get<double>();
            } else if (key == "min_port_operations") {
                c.min_port_operations = v.get<std::uint64_t>();
            } else if (key == "max_collisions") {
                c.max_collisions = v.is_null() ? std::nullopt : std::optional(v.get<std::uint64_t>());
            } else if (key == "max_failed_runs") {
                c.max_failed_runs = v.is_null() ? std::nullopt : std::optional(v.get<std::uint64_t>());
            } else if (key == "max_nav_error_rate") {
                c.max_nav_error_rate = v.is_null() ? std::nullopt : std::optional(v.get<double>());
            } else if (key == "max_system_failure_rate") {
                c.max_system_failure_rate = v.is_null() ? std::nullopt : std::optional(v.get<double>());
            } else if (key == "min_availability") {
                c.min_availability = v.is_null() ? std::nullopt : std::optional(v.get<double>());
            } else {
                return fail("criteria: unknown key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        return fail(std::string("criteria: ") + e.what());
    }
    for (const auto& f : {c.max_nav_error_rate, c.max_system_failure_rate, c.min_availability}) {
        if (f && !(*f >= 0.0 && *f <= 1.0)) return fail("criteria: fractions must lie in [0, 1]");
    }
    if (!(c.min_miles >= 0.0)) return fail("criteria: min_miles must be >= 0");
    return c;
}

namespace {

// Rates and sums come out of floating-point folds; a bound met exactly in
// decimal must not fail on the last bit.
constexpr double kSlack = 1e-9;

bool at_most(double value, double bound) { return value <= bound + kSlack * std::max(1.0, std::abs(bound)); }
bool at_least(double value, double bound) { return value >= bound - kSlack * std::max(1.0, std::abs(bound)); }

}  // namespace

GateDecision evaluate_stage(const CampaignLedger& ledger, const StageCriteria& c) {
    const auto& t = ledger.totals;
    Metrics m;
    if (t.total_steps > 0) m = compute_metrics(ledger);

    GateDecision d;
    d.stage = c.stage;
    d.criteria = c;
    if (!(t.miles >= c.min_miles * (1.0 - kSlack))) d.unmet.push_back("min_miles");
    if (t.port_operations < c.min_port_operations) d.unmet.push_back("min_port_operations");
    if (c.max_collisions && m.collisions > *c.max_collisions) d.unmet.push_back("max_collisions");
    if (c.max_failed_runs && t.failed_runs > *c.max_failed_runs) d.unmet.push_back("max_failed_runs");
    if (c.max_nav_error_rate && !at_most(m.nav_error_rate, *c.max_nav_error_rate)) {
        d.unmet.push_back("max_nav_error_rate");
    }
    if (c.max_system_failure_rate && !at_most(m.system_failure_rate, *c.max_system_failure_rate)) {
        d.unmet.push_back("max_system_failure_rate");
    }
    if (c.min_availability && !at_least(m.availability, *c.min_availability)) d.unmet.push_back("min_availability");
    d.pass = d.unmet.empty();
    return d;
}

void append_to_ledger_file(const std::filesystem::path& path, const CampaignLedger& before, const RunResult& result) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error(Errc::SinkUnavailable, "cannot open " + path.string());
    if (!before.runs.empty() && before.software_version != result.software_version) {
        const ordered_json reset = {{"reset",
                                     {{"from", before.software_version},
                                      {"to", result.software_version},
                                      {"discarded_runs", before.totals.runs}}}};
        out << reset.dump() << '\n';
    }
    out << ordered_json{{"run", to_json(result)}}.dump() << '\n';
    out.flush();
    if (!out) throw Error(Errc::SinkUnavailable, "write failed on " + path.string());
}

CampaignLedger load_ledger(const std::filesystem::path& path) {
    CampaignLedger ledger;
    std::ifstream in(path);
    if (!in) {
        if (!std::filesystem::exists(path)) return ledger;
        throw Error(Errc::LedgerCorrupt, "cannot read " + path.string());
    }
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::string> pending_reset;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(Errc::LedgerCorrupt, where + ": " + e.what());
        }
        if (j.contains("reset")) {
            const auto& rj = j.at("reset");
            if (!rj.is_object() || !rj.contains("from") || !rj.contains("to") ||
                rj.at("from") != ledger.software_version) {
                throw Error(Errc::LedgerCorrupt, where + ": reset marker does not match the ledger version");
            }
            pending_reset = rj.at("to").get<std::string>();
        } else if (j.contains("run")) {
            RunResult r;
            try {
                r = run_result_from_json(j.at("run"));
            } catch (const Error& e) {
                throw Error(Errc::LedgerCorrupt, where + ": " + e.what());
            }
            const bool changes = !ledger.runs.empty() && r.software_version != ledger.software_version;
            if (changes != pending_reset.has_value() || (pending_reset && *pending_reset != r.software_version)) {
                throw Error(Errc::LedgerCorrupt, where + ": version change without a matching reset marker");
            }
            pending_reset.reset();
            ledger = record_run(std::move(ledger), r);
        } else {
            throw Error(Errc::LedgerCorrupt, where + ": unknown record");
        }
    }
    if (pending_reset) throw Error(Errc::LedgerCorrupt, path.string() + ": dangling reset marker");
    return ledger;
}

}  // namespace mass
