#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "mass/certification.hpp"
#include "mass/error.hpp"
#include "mass/report.hpp"
#include "support/ledgers.hpp"

using namespace mass;
using testsupport::make_run;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "mass_cert_tests";
    std::filesystem::create_directories(dir);
    const auto p = dir / name;
    std::filesystem::remove(p);
    return p;
}

RunResult random_run(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> small(0, 3);
    RunResult r = make_run("v", small(rng) * 0.125 + 0.5, 100 + small(rng) * 50);
    r.nav_error_steps = small(rng);
    r.port_operations = small(rng);
    r.collisions = small(rng) == 3 ? 1 : 0;
    r.level1_events = small(rng) == 0 ? 1 : 0;
    r.critical_downtime = small(rng) * 0.5;
    if (small(rng) == 2) r.outcome = Outcome::timeout;
    return r;
}

}  // namespace

TEST_CASE("ledger totals fold is partition independent") {
    std::mt19937_64 rng(7);
    std::vector<RunResult> runs;
    for (int i = 0; i < 60; ++i) runs.push_back(random_run(rng));

    LedgerTotals whole;
    for (const auto& r : runs) whole += LedgerTotals::of(r);

    for (int trial = 0; trial < 50; ++trial) {
        LedgerTotals combined;
        LedgerTotals part;
        std::bernoulli_distribution cut(0.2);
        for (const auto& r : runs) {
            part += LedgerTotals::of(r);
            if (cut(rng)) {
                combined += part;
                part = {};
            }
        }
        combined += part;
        CHECK(combined == whole);
    }
}

TEST_CASE("record_run is monotone within a version") {
    std::mt19937_64 rng(11);
    CampaignLedger ledger;
    for (int i = 0; i < 40; ++i) {
        const LedgerTotals before = ledger.totals;
        ledger = record_run(std::move(ledger), random_run(rng));
        CHECK(ledger.totals.runs == before.runs + 1);
        CHECK(ledger.totals.miles >= before.miles);
        CHECK(ledger.totals.total_steps >= before.total_steps);
        CHECK(ledger.totals.violations >= before.violations);
        CHECK(ledger.totals.failed_runs >= before.failed_runs);
    }
    CHECK(ledger.resets.empty());
    CHECK(ledger.history.size() == 1);
}

TEST_CASE("a new software version resets the ledger to the new run") {
    CampaignLedger ledger;
    for (int i = 0; i < 5; ++i) ledger = record_run(std::move(ledger), make_run("A", 10.0));
    CHECK(ledger.totals.runs == 5);

    const RunResult b = make_run("B", 3.0);
    ledger = record_run(std::move(ledger), b);
    CHECK(ledger.software_version == "B");
    REQUIRE(ledger.runs.size() == 1);
    CHECK(ledger.totals == LedgerTotals::of(b));
    REQUIRE(ledger.resets.size() == 1);
    CHECK(ledger.resets[0].from_version == "A");
    CHECK(ledger.resets[0].to_version == "B");
    CHECK(ledger.resets[0].discarded_runs == 5);
    CHECK(ledger.resets[0].discarded_miles == doctest::Approx(50.0));
    REQUIRE(ledger.history.size() == 2);
    CHECK(ledger.history[0].runs == 5);
    CHECK(ledger.history[1].runs == 1);
}

TEST_CASE("metrics") {
    SUBCASE("failure rate counts runs with failover events") {
        CampaignLedger l;
        for (int i = 0; i < 100; ++i) {
            RunResult r = make_run("v", 1.0);
            if (i % 50 == 0) r.level2_events = 1;
            l = record_run(std::move(l), r);
        }
        CHECK(compute_metrics(l).system_failure_rate == doctest::Approx(0.02).epsilon(1e-12));
    }
    SUBCASE("availability from downtime") {
        LedgerTotals t;
        t.runs = 1;
        t.total_steps = 360'000;
        t.duration = 36'000.0;
        t.critical_downtime = 36.0;
        CHECK(compute_metrics(testsupport::ledger_with(t)).availability == doctest::Approx(0.999).epsilon(1e-12));
    }
    SUBCASE("nav error rate") {
        LedgerTotals t;
        t.runs = 2;
        t.total_steps = 20'000;
        t.nav_error_steps = 3;
        CHECK(compute_metrics(testsupport::ledger_with(t)).nav_error_rate == doctest::Approx(1.5e-4));
    }
    SUBCASE("empty ledger") {
        try {
            compute_metrics(CampaignLedger{});
            FAIL("expected EmptyLedger");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::EmptyLedger);
        }
    }
}

TEST_CASE("stage gates pass on the boundary and flip one unit past it") {
    for (Stage s : kAllStages) {
        const StageCriteria c = builtin_criteria(s);
        const LedgerTotals edge = testsupport::boundary_totals(c);
        CAPTURE(to_string(s));
        CHECK(evaluate_stage(testsupport::ledger_with(edge), c).pass);
        for (const auto& p : testsupport::perturbations(c)) {
            CAPTURE(p.criterion);
            LedgerTotals worse = edge;
            p.worsen(worse);
            const GateDecision d = evaluate_stage(testsupport::ledger_with(worse), c);
            CHECK_FALSE(d.pass);
            REQUIRE(d.unmet.size() == 1);
            CHECK(d.unmet[0] == p.criterion);

            StageCriteria looser = c;
            p.loosen(looser);
            CHECK(evaluate_stage(testsupport::ledger_with(worse), looser).pass);
        }
    }
}

TEST_CASE("gate table values") {
    CHECK(builtin_criteria(Stage::PATH_SIM).min_miles == 5000.0);
    CHECK(builtin_criteria(Stage::PATH_SIM).max_failed_runs == 0u);
    const auto small = builtin_criteria(Stage::SMALL_CRAFT);
    CHECK(small.min_miles == 15000.0);
    CHECK(small.min_port_operations == 150);
    CHECK(*small.max_nav_error_rate == 0.001);
    CHECK(*small.max_system_failure_rate == 0.01);
    CHECK(*small.min_availability == 0.999);
    const auto imo = builtin_criteria(Stage::IMO);
    CHECK(imo.min_miles == 50000.0);
    CHECK(*imo.max_nav_error_rate == 0.00001);
    CHECK(*imo.max_system_failure_rate == 0.0005);
    CHECK(*imo.min_availability == 0.99999);
}

TEST_CASE("empty ledger fails gates with a mileage floor") {
    const GateDecision d = evaluate_stage(CampaignLedger{}, builtin_criteria(Stage::PATH_SIM));
    CHECK_FALSE(d.pass);
    REQUIRE(d.unmet.size() == 1);
    CHECK(d.unmet[0] == "min_miles");
}

TEST_CASE("load_criteria") {
    const auto c = load_criteria(nlohmann::json{{"stage", "SMALL_CRAFT"}, {"min_miles", 10.0}, {"min_availability", nullptr}});
    CHECK(c.stage == Stage::SMALL_CRAFT);
    CHECK(c.min_miles == 10.0);
    CHECK_FALSE(c.min_availability.has_value());
    CHECK(c.min_port_operations == 150);

    for (const auto& bad : {nlohmann::json{{"min_miles", 1}}, nlohmann::json{{"stage", "DRYDOCK"}},
                            nlohmann::json{{"stage", "HIL"}, {"max_speed", 3}},
                            nlohmann::json{{"stage", "HIL"}, {"min_miles", "lots"}}}) {
        CAPTURE(bad.dump());
        try {
            load_criteria(bad);
            FAIL("expected ScenarioLoadError");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::ScenarioLoadError);
        }
    }
}

TEST_CASE("ledger file round trip") {
    const auto path = temp_file("ledger.jsonl");
    CampaignLedger mem;
    std::vector<RunResult> runs{make_run("A", 1.5), make_run("A", 2.25), make_run("B", 0.75), make_run("B", 4.0)};
    runs[1].violations.push_back({12.3, "257000001", 41.0, 50.0});
    runs[1].outcome = Outcome::collision;
    runs[1].collisions = 1;
    runs[3].failover_events.push_back({3.0, ControlState::NORMAL, ControlState::BACKUP_CONTROL_L2, "HeartbeatMissed"});
    runs[3].level2_events = 1;
    runs[3].min_separation = std::numeric_limits<double>::infinity();

    for (const auto& r : runs) {
        append_to_ledger_file(path, mem, r);
        mem = record_run(std::move(mem), r);
    }
    const CampaignLedger loaded = load_ledger(path);
    CHECK(loaded.software_version == "B");
    CHECK(loaded.totals == mem.totals);
    REQUIRE(loaded.runs.size() == 2);
    CHECK(to_json(loaded.runs[1]) == to_json(mem.runs[1]));
    REQUIRE(loaded.resets.size() == 1);
    CHECK(loaded.resets[0].discarded_runs == 2);
    CHECK(loaded.history.size() == 2);

    const auto doc = emit_report(loaded, evaluate_all_stages(loaded)).document;
    const auto doc2 = emit_report(mem, evaluate_all_stages(mem)).document;
    CHECK(doc.dump() == doc2.dump());
}

TEST_CASE("missing ledger file is empty") {
    const auto l = load_ledger(temp_file("absent.jsonl"));
    CHECK(l.runs.empty());
    CHECK(l.totals.runs == 0);
}

TEST_CASE("corrupt ledgers are rejected") {
    const std::string good_a = nlohmann::ordered_json{{"run", to_json(make_run("A", 1.0))}}.dump();
    const std::string good_b = nlohmann::ordered_json{{"run", to_json(make_run("B", 1.0))}}.dump();
    const std::vector<std::string> cases{
        good_a + "\n{not json\n",
        good_a + "\n{\"audit\":{}}\n",
        good_a + "\n" + good_b + "\n",
        good_a + "\n{\"reset\":{\"from\":\"X\",\"to\":\"B\",\"discarded_runs\":1}}\n" + good_b + "\n",
        good_a + "\n{\"reset\":{\"from\":\"A\",\"to\":\"B\",\"discarded_runs\":1}}\n",
        "{\"run\":{\"scenario_id\":\"s\"}}\n",
    };
    int n = 0;
    for (const auto& text : cases) {
        const auto path = temp_file("corrupt" + std::to_string(n++) + ".jsonl");
        std::ofstream(path) << text;
        CAPTURE(text);
        try {
            load_ledger(path);
            FAIL("expected LedgerCorrupt");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::LedgerCorrupt);
        }
    }
}

TEST_CASE("report") {
    SUBCASE("empty ledger") {
        const CampaignLedger empty;
        const Report rep = emit_report(empty, evaluate_all_stages(empty));
        CHECK(rep.document.at("metrics").is_null());
        CHECK(rep.document.at("runs").empty());
        CHECK(rep.document.at("gates").size() == std::size(kAllStages));
        CHECK(rep.document.at("gates")[0].at("decision") == "fail");
    }
    SUBCASE("reset epochs are listed") {
        CampaignLedger l;
        l = record_run(std::move(l), make_run("A", 2.0));
        l = record_run(std::move(l), make_run("B", 1.0));
        const Report rep = emit_report(l, evaluate_all_stages(l));
        CHECK(rep.document.at("history").size() == 2);
        CHECK(rep.document.at("resets")[0].at("from") == "A");
        CHECK(rep.document.at("totals").at("runs") == 1);
        CHECK(rep.summary.find("B") != std::string::npos);
    }
    SUBCASE("write_report") {
        const auto path = temp_file("report.json");
        CampaignLedger l = record_run({}, make_run("A", 2.0));
        const Report rep = emit_report(l, evaluate_all_stages(l));
        write_report(rep, path);
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        CHECK(ss.str() == report_text(rep));
        auto txt = path;
        txt.replace_extension(".txt");
        CHECK(std::filesystem::exists(txt));
        try {
            write_report(rep, "/nonexistent-dir/r.json");
            FAIL("expected SinkUnavailable");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::SinkUnavailable);
        }
    }
}
