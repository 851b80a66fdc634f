#include "mass/campaign.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <thread>

#include "mass/error.hpp"

namespace mass {

using nlohmann::json;

CampaignSpec load_campaign(const std::filesystem::path& path) {
    auto fail = [&](const std::string& what) { throw Error(Errc::ScenarioLoadError, path.string() + ": " + what); };
    std::ifstream in(path);
    if (!in) fail("cannot open");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(e.what());
    }
    if (!doc.is_object()) fail("expected an object");
    const auto base = path.parent_path();
    CampaignSpec c;
    try {
        for (const auto& [key, v] : doc.items()) {
            if (key == "id") {
                c.id = v.get<std::string>();
            } else if (key == "scenarios") {
                for (const auto& s : v) c.scenarios.push_back(base / s.get<std::string>());
            } else if (key == "stage") {
                c.stage = parse_stage(v.get<std::string>());
                if (!c.stage) fail("unknown stage " + v.dump());
            } else if (key == "ledger") {
                c.ledger = base / v.get<std::string>();
            } else if (key == "report") {
                c.report = base / v.get<std::string>();
            } else {
                fail("unknown key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        fail(e.what());
    }
    if (c.scenarios.empty()) fail("no scenarios");
    return c;
}

CampaignOutcome run_campaign(const std::vector<ScenarioSpec>& scenarios, CampaignLedger ledger, unsigned threads,
                             LogSink* log) {
    CampaignOutcome out;
    out.results.resize(scenarios.size());
    std::vector<std::exception_ptr> errors(scenarios.size());
    std::atomic<std::size_t> next{0};
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(scenarios.size()));

    auto worker = [&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) {
            try {
                out.results[i] = run_scenario(scenarios[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    pool.clear();

    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        ledger = record_run(std::move(ledger), out.results[i], log);
    }
    out.ledger = std::move(ledger);
    out.decisions = evaluate_all_stages(out.ledger);
    out.report = emit_report(out.ledger, out.decisions);
    return out;
}

CampaignOutcome run_campaign_file(const CampaignSpec& spec, unsigned threads, LogSink* log) {
    std::vector<ScenarioSpec> scenarios;
    for (const auto& p : spec.scenarios) scenarios.push_back(load_scenario(p, log));
    CampaignLedger ledger = spec.ledger ? load_ledger(*spec.ledger) : CampaignLedger{};
    CampaignOutcome out = run_campaign(scenarios, ledger, threads, log);
    if (spec.ledger) {
        CampaignLedger before = std::move(ledger);
        for (const auto& r : out.results) {
            append_to_ledger_file(*spec.ledger, before, r);
            before = record_run(std::move(before), r);
        }
    }
    if (spec.report) write_report(out.report, *spec.report);
    return out;
}

}  // namespace mass
