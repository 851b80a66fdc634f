#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "mass/console.hpp"
#include "mass/console_server.hpp"
#include "mass/error.hpp"
#include "mass/scenario.hpp"
#include "support/data_path.hpp"

using namespace mass;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

StatusSnapshot snapshot(std::uint64_t step, ControlState state = ControlState::NORMAL) {
    StatusSnapshot s;
    s.step = step;
    s.time = static_cast<double>(step) * 0.1;
    s.failover.state = state;
    return s;
}

OverrideCommand cmd(OverrideRequest::Kind kind, double rudder = 0.0) {
    OverrideCommand c;
    c.kind = kind;
    c.command.thrust = 0.5;
    c.command.rudder_deg = rudder;
    return c;
}

template <class F>
Errc error_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::MalformedCommand;
}

}  // namespace

TEST_CASE("parse_override") {
    const auto h = parse_override(json::parse(R"({"kind":"helm","thrust":0.4,"rudder_deg":-10,"operator_id":"op"})"));
    CHECK(h.kind == OverrideRequest::Kind::helm);
    CHECK(h.command.thrust == 0.4);
    CHECK(h.command.rudder_deg == -10.0);
    CHECK(h.operator_id == "op");
    CHECK(parse_override(json{{"kind", "release"}}).kind == OverrideRequest::Kind::release);

    for (const char* bad : {R"({})", R"({"kind":"warp"})", R"({"kind":"helm","thrust":1.5})",
                            R"({"kind":"helm","thrust":"full"})", R"({"kind":"engage","rudder_deg":5})",
                            R"({"kind":"helm","colour":"red"})", R"([1,2])"}) {
        CAPTURE(bad);
        CHECK(error_of([&] { parse_override(json::parse(bad)); }) == Errc::MalformedCommand);
    }
}

TEST_CASE("hub without a simulation") {
    ConsoleHub hub;
    CHECK(error_of([&] { hub.status(); }) == Errc::NoActiveSimulation);
    CHECK(error_of([&] { hub.submit(cmd(OverrideRequest::Kind::engage)); }) == Errc::NoActiveSimulation);
    hub.attach();
    CHECK(error_of([&] { hub.status(); }) == Errc::NoActiveSimulation);
    hub.publish(snapshot(1));
    CHECK(hub.status().body->at("step") == 1);
}

TEST_CASE("stream ordering and coalescing") {
    ConsoleHub hub;
    hub.attach();
    auto sub = hub.subscribe();
    hub.publish(snapshot(1));
    hub.publish(snapshot(2));
    hub.publish_event({0.2, ControlState::NORMAL, ControlState::MANUAL_OVERRIDE, "OverrideEngaged"});
    hub.publish(snapshot(3));
    hub.publish_event({0.3, ControlState::MANUAL_OVERRIDE, ControlState::NORMAL, "OverrideReleased"});

    std::vector<StreamMessage> got;
    while (auto m = sub->next(0ms)) got.push_back(*m);
    REQUIRE(got.size() == 3);
    CHECK(got[0].kind == StreamMessage::Kind::event);
    CHECK(got[0].body->at("to") == "MANUAL_OVERRIDE");
    CHECK(got[1].kind == StreamMessage::Kind::snapshot);
    CHECK(got[1].body->at("step") == 3);
    CHECK(got[2].kind == StreamMessage::Kind::event);
    CHECK(got[2].body->at("to") == "NORMAL");
    for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i].seq > got[i - 1].seq);

    const json line = json::parse(got[1].line());
    CHECK(line.at("type") == "snapshot");
    CHECK(line.at("seq") == got[1].seq);

    hub.publish(snapshot(4));
    auto m = sub->next(10ms);
    REQUIRE(m);
    CHECK(m->body->at("step") == 4);
    CHECK_FALSE(sub->next(10ms));

    hub.detach();
    CHECK(error_of([&] { sub->next(10ms); }) == Errc::SubscriberGone);
}

TEST_CASE("slow subscribers still get every event") {
    ConsoleHub hub;
    hub.attach();
    auto sub = hub.subscribe();
    for (int i = 0; i < 100; ++i) {
        hub.publish(snapshot(i));
        if (i % 10 == 0) hub.publish_event({i * 0.1, ControlState::NORMAL, ControlState::DEGRADED_L1, "fault"});
    }
    int events = 0;
    int snapshots = 0;
    while (auto m = sub->next(0ms)) (m->kind == StreamMessage::Kind::event ? events : snapshots)++;
    CHECK(events == 10);
    CHECK(snapshots == 1);
}

TEST_CASE("helm requires an engaged override") {
    ConsoleHub hub;
    hub.attach();
    hub.publish(snapshot(1));
    CHECK(error_of([&] { hub.submit(cmd(OverrideRequest::Kind::helm, 5)); }) == Errc::HelmWithoutOverride);
    auto engage = hub.submit(cmd(OverrideRequest::Kind::engage));
    auto helm = hub.submit(cmd(OverrideRequest::Kind::helm, 5));
    const auto drained = hub.drain(1.5);
    REQUIRE(drained.size() == 2);
    CHECK(drained[0].kind == OverrideRequest::Kind::engage);
    CHECK(drained[1].command.rudder_deg == 5.0);
    CHECK(engage.get() == 1.5);
    CHECK(helm.get() == 1.5);
    hub.submit(cmd(OverrideRequest::Kind::release));
    CHECK(error_of([&] { hub.submit(cmd(OverrideRequest::Kind::helm, 5)); }) == Errc::HelmWithoutOverride);

    ConsoleHub manual;
    manual.attach();
    manual.publish(snapshot(1, ControlState::MANUAL_OVERRIDE));
    CHECK_NOTHROW(manual.submit(cmd(OverrideRequest::Kind::helm, 5)));
}

TEST_CASE("a full override queue coalesces helm orders") {
    ConsoleHub hub(HubConfig{2});
    hub.attach();
    hub.submit(cmd(OverrideRequest::Kind::engage));
    auto a = hub.submit(cmd(OverrideRequest::Kind::helm, 1));
    auto b = hub.submit(cmd(OverrideRequest::Kind::helm, 2));
    auto c = hub.submit(cmd(OverrideRequest::Kind::helm, 3));
    auto release = hub.submit(cmd(OverrideRequest::Kind::release));
    const auto drained = hub.drain(2.0);
    REQUIRE(drained.size() == 3);
    CHECK(drained[1].command.rudder_deg == 3.0);
    CHECK(drained[2].kind == OverrideRequest::Kind::release);
    CHECK(a.get() == 2.0);
    CHECK(b.get() == 2.0);
    CHECK(c.get() == 2.0);
    CHECK(release.get() == 2.0);
}

TEST_CASE("detach fails pending acknowledgements") {
    ConsoleHub hub;
    hub.attach();
    auto f = hub.submit(cmd(OverrideRequest::Kind::engage));
    hub.detach();
    CHECK(error_of([&] { f.get(); }) == Errc::NoActiveSimulation);
}

TEST_CASE("listen address parsing") {
    CHECK(parse_listen_address("0.0.0.0:9000").host == "0.0.0.0");
    CHECK(parse_listen_address("0.0.0.0:9000").port == 9000);
    CHECK(parse_listen_address(":81").host == "127.0.0.1");
    CHECK(parse_listen_address("8080").port == 8080);
    CHECK(error_of([] { parse_listen_address("host:http"); }) == Errc::MalformedCommand);
    CHECK(error_of([] { parse_listen_address("host:70000"); }) == Errc::MalformedCommand);
}

TEST_CASE("override round trip over HTTP against a live run") {
    ScenarioSpec spec = load_scenario(testsupport::data_path("scenarios/nominal_10min.json"));
    spec.timeout_s = 300.0;

    ConsoleHub hub;
    ConsoleServer server(hub, ServerConfig{"127.0.0.1", 0, "s3cret", 5000});
    const int port = server.start();

    std::atomic<bool> stop{false};
    SimulationHooks hooks = hub.hooks();
    const auto wall0 = std::chrono::steady_clock::now();
    hooks.pace = [&](double t) { std::this_thread::sleep_until(wall0 + std::chrono::duration<double>(t / 25.0)); };
    hooks.should_stop = [&] { return stop.load(); };
    hub.attach();
    std::thread sim([&] { run_scenario(spec, hooks); });

    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(10, 0);
    const httplib::Headers auth{{"Authorization", "Bearer s3cret"}};

    std::vector<json> stream;
    std::atomic<int> received{0};
    std::thread reader([&] {
        httplib::Client sc("127.0.0.1", port);
        sc.set_read_timeout(30, 0);
        std::string buf;
        sc.Get("/stream", auth, [&](const char* data, std::size_t n) {
            buf.append(data, n);
            for (auto nl = buf.find('\n'); nl != std::string::npos; nl = buf.find('\n')) {
                stream.push_back(json::parse(buf.substr(0, nl)));
                ++received;
                buf.erase(0, nl + 1);
            }
            return true;
        });
    });

    auto status = [&] {
        for (int i = 0; i < 200; ++i) {
            auto res = cli.Get("/status", auth);
            if (res && res->status == 200) return json::parse(res->body);
            std::this_thread::sleep_for(20ms);
        }
        FAIL("no status");
        return json();
    };
    auto post = [&](const json& body) {
        auto res = cli.Post("/override", auth, body.dump(), "application/json");
        REQUIRE(res);
        return std::pair{res->status, json::parse(res->body)};
    };
    auto wait_for_time = [&](double t) {
        while (status().at("time").get<double>() < t) std::this_thread::sleep_for(20ms);
    };

    {
        auto unauth = cli.Get("/status");
        REQUIRE(unauth);
        CHECK(unauth->status == 401);
        auto wrong = cli.Get("/status", httplib::Headers{{"Authorization", "Bearer nope"}});
        REQUIRE(wrong);
        CHECK(wrong->status == 401);

        while (received.load() == 0) std::this_thread::sleep_for(10ms);
        wait_for_time(5.0);
        auto [code, body] = post(json{{"kind", "helm"}, {"rudder_deg", 10}, {"thrust", 0.5}});
        CHECK(code == 409);
        CHECK(body.at("error") == "HelmWithoutOverride");
        std::tie(code, body) = post(json{{"kind", "helm"}, {"thrust", 7}});
        CHECK(code == 400);

        const double heading0 = status().at("environment").at("own").at("heading_deg").get<double>();
        std::tie(code, body) = post(json{{"kind", "engage"}, {"operator_id", "op"}});
        CHECK(code == 200);
        CHECK(body.at("accepted") == true);
        const double engaged_at = body.at("effect_time").get<double>();
        std::tie(code, body) = post(json{{"kind", "helm"}, {"rudder_deg", 10}, {"thrust", 0.5}});
        CHECK(code == 200);
        CHECK(body.at("effect_time").get<double>() >= engaged_at);
        CHECK(status().at("equipment_status").at("state") == "MANUAL_OVERRIDE");

        wait_for_time(engaged_at + 10.0);
        const double heading1 = status().at("environment").at("own").at("heading_deg").get<double>();
        CHECK(std::abs(wrap180(heading1 - heading0)) > 10.0);

        std::tie(code, body) = post(json{{"kind", "release"}});
        CHECK(code == 200);
        const double released_at = body.at("effect_time").get<double>();
        wait_for_time(released_at + 0.5);
        CHECK(status().at("equipment_status").at("state") == "NORMAL");
    }

    stop = true;
    sim.join();
    hub.detach();
    reader.join();
    server.stop();

    std::vector<std::string> states;
    std::uint64_t last_seq = 0;
    for (const auto& m : stream) {
        CHECK(m.at("seq").get<std::uint64_t>() > last_seq);
        last_seq = m.at("seq").get<std::uint64_t>();
        if (m.at("type") != "snapshot") continue;
        const auto s = m.at("data").at("equipment_status").at("state").get<std::string>();
        if (states.empty() || states.back() != s) states.push_back(s);
    }
    CHECK(states == std::vector<std::string>{"NORMAL", "MANUAL_OVERRIDE", "NORMAL"});
    int events = 0;
    for (const auto& m : stream) events += m.at("type") == "event";
    CHECK(events >= 2);
}
