// masscert: scenario runs, campaigns, stage gates, reports and the live console.

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "mass/campaign.hpp"
#include "mass/certification.hpp"
#include "mass/console_server.hpp"
#include "mass/error.hpp"
#include "mass/report.hpp"
#include "mass/scenario.hpp"
#include "mass/simulation.hpp"
#include "mass/timing.hpp"

namespace {

using namespace mass;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kGateFail = 1;
constexpr int kError = 2;

volatile std::sig_atomic_t g_interrupted = 0;

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ScenarioLoadError, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Errc::ScenarioLoadError, path + ": " + e.what());
    }
}

void print_gate(const GateDecision& d) {
    std::cout << "gate " << to_string(d.stage) << ": " << (d.pass ? "PASS" : "FAIL");
    for (std::size_t i = 0; i < d.unmet.size(); ++i) std::cout << (i == 0 ? "  unmet: " : ", ") << d.unmet[i];
    std::cout << "\n";
}

int cmd_run(const std::vector<std::string>& files, const std::string& ledger_path, StreamSink& log) {
    bool all_ok = true;
    for (const auto& f : files) {
        const ScenarioSpec spec = load_scenario(f, &log);
        const RunResult r = run_scenario(spec);
        if (!ledger_path.empty()) {
            const CampaignLedger before = load_ledger(ledger_path);
            append_to_ledger_file(ledger_path, before, r);
            if (!before.runs.empty() && before.software_version != r.software_version) {
                log.write("ledger reset: new software version " + r.software_version.substr(0, 12));
            }
        }
        std::cout << to_json(r).dump(2) << "\n";
        all_ok = all_ok && !r.failed();
    }
    return all_ok ? kOk : kGateFail;
}

int cmd_campaign(const std::string& file, unsigned threads, StreamSink& log) {
    const CampaignSpec spec = load_campaign(file);
    const CampaignOutcome out = run_campaign_file(spec, threads, &log);
    std::cout << out.report.summary;
    if (!spec.stage) return kOk;
    const auto& d = out.decisions.at(static_cast<std::size_t>(*spec.stage));
    return d.pass ? kOk : kGateFail;
}

int cmd_gate(const std::string& ledger_path, const std::string& stage_name, const std::string& criteria_path) {
    const CampaignLedger ledger = load_ledger(ledger_path);
    StageCriteria criteria;
    if (!criteria_path.empty()) {
        criteria = load_criteria(read_json(criteria_path));
    } else {
        const auto stage = parse_stage(stage_name);
        if (!stage) throw Error(Errc::ScenarioLoadError, "unknown stage '" + stage_name + "'");
        criteria = builtin_criteria(*stage);
    }
    if (!stage_name.empty() && to_string(criteria.stage) != stage_name) {
        throw Error(Errc::ScenarioLoadError, "criteria file is for " + std::string(to_string(criteria.stage)));
    }
    const GateDecision d = evaluate_stage(ledger, criteria);
    print_gate(d);
    return d.pass ? kOk : kGateFail;
}

int cmd_report(const std::string& ledger_path, const std::string& out_path) {
    const CampaignLedger ledger = load_ledger(ledger_path);
    const auto decisions = evaluate_all_stages(ledger);
    const Report rep = emit_report(ledger, decisions);
    write_report(rep, out_path);
    std::cout << rep.summary;
    return kOk;
}

int cmd_timing(const std::string& file) {
    const json doc = read_json(file);
    const bool scenario = doc.contains("goal") || doc.contains("rng_seed");
    const TimingBudget budget = scenario ? load_scenario(file).timing : parse_timing_budget(doc);
    const TimingResult r = min_update_rate(budget);
    const ordered_json out = {{"t_sys_response", r.t_sys_response},
                              {"t_available", r.t_available},
                              {"margin", r.margin},
                              {"min_update_rate", r.min_update_rate}};
    std::cout << out.dump(2) << "\n";
    return kOk;
}

int cmd_serve(const std::string& file, const std::string& listen, const std::string& token, double speed,
              double linger_s, StreamSink& log) {
    const ScenarioSpec spec = load_scenario(file, &log);
    ServerConfig cfg = parse_listen_address(listen);
    cfg.token = token;
    ConsoleHub hub;
    ConsoleServer server(hub, cfg);
    const int port = server.start();
    std::cerr << "console listening on " << cfg.host << ":" << port << std::endl;

    SimulationHooks hooks = hub.hooks();
    const auto wall0 = std::chrono::steady_clock::now();
    if (speed > 0.0) {
        hooks.pace = [&](double t) {
            std::this_thread::sleep_until(wall0 + std::chrono::duration<double>(t / speed));
        };
    }
    hooks.should_stop = [] { return g_interrupted != 0; };
    hub.attach();
    const RunResult r = run_scenario(spec, hooks);
    std::cout << to_json(r).dump(2) << std::endl;
    const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(linger_s);
    while (g_interrupted == 0 && std::chrono::steady_clock::now() < until) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    hub.detach();
    server.stop();
    return r.failed() ? kGateFail : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MASS certification harness"};
    app.require_subcommand(1);
    StreamSink log(std::cerr);

    std::vector<std::string> run_files;
    std::string run_ledger;
    auto* run = app.add_subcommand("run", "Run scenarios and print their results");
    run->add_option("scenarios", run_files, "Scenario files")->required()->check(CLI::ExistingFile);
    run->add_option("--ledger", run_ledger, "Append results to this ledger file");

    std::string campaign_file;
    unsigned threads = 0;
    auto* campaign = app.add_subcommand("campaign", "Run a campaign file");
    campaign->add_option("campaign", campaign_file, "Campaign file")->required()->check(CLI::ExistingFile);
    campaign->add_option("-j,--threads", threads, "Parallel scenario runs (0 = hardware)");

    std::string gate_ledger, gate_stage, gate_criteria;
    auto* gate = app.add_subcommand("gate", "Evaluate a stage gate against a ledger");
    gate->add_option("ledger", gate_ledger, "Ledger file")->required();
    gate->add_option("--stage", gate_stage, "Stage id")->required();
    gate->add_option("--criteria", gate_criteria, "Criteria file overriding the built-in table")
        ->check(CLI::ExistingFile);

    std::string report_ledger, report_out;
    auto* report = app.add_subcommand("report", "Write the certification report for a ledger");
    report->add_option("ledger", report_ledger, "Ledger file")->required();
    report->add_option("-o,--output", report_out, "Report path (.json; summary goes to .txt)")->required();

    std::string serve_file, listen = "127.0.0.1:8080", token;
    double speed = 1.0, linger = 0.0;
    auto* serve = app.add_subcommand("serve", "Run a scenario live behind the console API");
    serve->add_option("scenario", serve_file, "Scenario file")->required()->check(CLI::ExistingFile);
    serve->add_option("--listen", listen, "host:port")->capture_default_str();
    serve->add_option("--token", token, "Bearer token required on every request");
    serve->add_option("--speed", speed, "Sim seconds per wall second (0 = unpaced)")->capture_default_str();
    serve->add_option("--linger", linger, "Seconds to keep serving after the run ends")->capture_default_str();

    std::string timing_file;
    auto* timing = app.add_subcommand("timing", "Print the timing result for a budget file");
    timing->add_option("budget", timing_file, "Budget or scenario file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kError;
    }

    std::signal(SIGINT, [](int) { g_interrupted = 1; });
    std::signal(SIGTERM, [](int) { g_interrupted = 1; });

    try {
        if (*run) return cmd_run(run_files, run_ledger, log);
        if (*campaign) return cmd_campaign(campaign_file, threads, log);
        if (*gate) return cmd_gate(gate_ledger, gate_stage, gate_criteria);
        if (*report) return cmd_report(report_ledger, report_out);
        if (*serve) return cmd_serve(serve_file, listen, token, speed, linger, log);
        if (*timing) return cmd_timing(timing_file);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
    return kError;
}
