#include "mass/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mass/error.hpp"

namespace mass {

using nlohmann::ordered_json;

namespace {

ordered_json totals_json(const LedgerTotals& t) {
    return {{"runs", t.runs},
            {"miles", t.miles},
            {"port_operations", t.port_operations},
            {"violations", t.violations},
            {"collisions", t.collisions},
            {"nav_error_steps", t.nav_error_steps},
            {"total_steps", t.total_steps},
            {"failure_runs", t.failure_runs},
            {"failed_runs", t.failed_runs},
            {"critical_downtime", t.critical_downtime},
            {"duration", t.duration}};
}

ordered_json optional_json(const auto& v) { return v ? ordered_json(*v) : ordered_json(); }

ordered_json criteria_json(const StageCriteria& c) {
    return {{"min_miles", c.min_miles},
            {"min_port_operations", c.min_port_operations},
            {"max_collisions", optional_json(c.max_collisions)},
            {"max_failed_runs", optional_json(c.max_failed_runs)},
            {"max_nav_error_rate", optional_json(c.max_nav_error_rate)},
            {"max_system_failure_rate", optional_json(c.max_system_failure_rate)},
            {"min_availability", optional_json(c.min_availability)}};
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::vector<GateDecision> evaluate_all_stages(const CampaignLedger& ledger) {
    std::vector<GateDecision> out;
    for (Stage s : kAllStages) out.push_back(evaluate_stage(ledger, builtin_criteria(s)));
    return out;
}

Report emit_report(const CampaignLedger& ledger, std::span<const GateDecision> decisions) {
    Report rep;
    auto& doc = rep.document;
    doc["software_version"] = ledger.software_version;
    doc["totals"] = totals_json(ledger.totals);
    std::optional<Metrics> metrics;
    if (ledger.totals.total_steps > 0) metrics = compute_metrics(ledger);
    doc["metrics"] = metrics ? ordered_json{{"nav_error_rate", metrics->nav_error_rate},
                                            {"system_failure_rate", metrics->system_failure_rate},
                                            {"availability", metrics->availability},
                                            {"collisions", metrics->collisions}}
                             : ordered_json();

    ordered_json runs = ordered_json::array();
    for (const auto& r : ledger.runs) {
        runs.push_back({{"scenario_id", r.scenario_id},
                        {"seed", r.seed},
                        {"outcome", to_string(r.outcome)},
                        {"miles", r.miles},
                        {"duration", r.duration},
                        {"total_steps", r.total_steps},
                        {"nav_error_steps", r.nav_error_steps},
                        {"critical_downtime", r.critical_downtime},
                        {"port_operations", r.port_operations},
                        {"violations", r.violations.size()},
                        {"collisions", r.collisions},
                        {"min_separation", std::isfinite(r.min_separation) ? ordered_json(r.min_separation)
                                                                            : ordered_json()},
                        {"level1_events", r.level1_events},
                        {"level2_events", r.level2_events},
                        {"final_state", to_string(r.final_state)},
                        {"failed", r.failed()}});
    }
    doc["runs"] = runs;

    ordered_json gates = ordered_json::array();
    for (const auto& d : decisions) {
        gates.push_back({{"stage", to_string(d.stage)},
                         {"decision", d.pass ? "pass" : "fail"},
                         {"unmet", d.unmet},
                         {"criteria", criteria_json(d.criteria)}});
    }
    doc["gates"] = gates;

    ordered_json history = ordered_json::array();
    for (const auto& h : ledger.history) {
        history.push_back({{"software_version", h.software_version}, {"runs", h.runs}, {"miles", h.miles}});
    }
    doc["history"] = history;
    ordered_json resets = ordered_json::array();
    for (const auto& r : ledger.resets) {
        resets.push_back({{"from", r.from_version},
                          {"to", r.to_version},
                          {"discarded_runs", r.discarded_runs},
                          {"discarded_miles", r.discarded_miles}});
    }
    doc["resets"] = resets;

    std::ostringstream s;
    const auto& t = ledger.totals;
    s << "MASS certification report\n";
    s << "software version: " << (ledger.software_version.empty() ? "(none)" : ledger.software_version) << "\n";
    s << "runs: " << t.runs << "  miles: " << fixed(t.miles, 3) << " nmi  port operations: " << t.port_operations
      << "\n";
    s << "violations: " << t.violations << "  collisions: " << t.collisions << "  failed runs: " << t.failed_runs
      << "\n";
    if (metrics) {
        s << "nav error rate: " << fixed(metrics->nav_error_rate, 6)
          << "  system failure rate: " << fixed(metrics->system_failure_rate, 6)
          << "  availability: " << fixed(metrics->availability, 6) << "\n";
    } else {
        s << "metrics: n/a (no recorded steps)\n";
    }
    for (const auto& d : decisions) {
        s << "gate " << to_string(d.stage) << ": " << (d.pass ? "PASS" : "FAIL");
        for (std::size_t i = 0; i < d.unmet.size(); ++i) s << (i == 0 ? "  unmet: " : ", ") << d.unmet[i];
        s << "\n";
    }
    s << "version epochs: " << ledger.history.size() << "  resets: " << ledger.resets.size() << "\n";
    rep.summary = s.str();
    return rep;
}

std::string report_text(const Report& report) { return report.document.dump(2) + "\n"; }

void write_report(const Report& report, const std::filesystem::path& path) {
    auto write = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::SinkUnavailable, "cannot open " + p.string());
        out << text;
        out.flush();
        if (!out) throw Error(Errc::SinkUnavailable, "write failed on " + p.string());
    };
    write(path, report_text(report));
    auto txt = path;
    txt.replace_extension(".txt");
    write(txt, report.summary);
}

}  // namespace mass
