#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "mass/error.hpp"
#include "mass/planner.hpp"

using namespace mass;

namespace {

ObstacleTrack stationary(std::string id, Vec2 p) {
    ObstacleTrack tr;
    tr.id = std::move(id);
    tr.samples.push_back({0.0, p, 0.0, 0.0});
    return tr;
}

ObstacleTrack mover(std::string id, Vec2 p0, Vec2 v, double t0, double t1) {
    ObstacleTrack tr;
    tr.id = std::move(id);
    tr.samples.push_back({t0, p0, v.norm(), 0.0});
    tr.samples.push_back({t1, p0 + v * (t1 - t0), v.norm(), 0.0});
    return tr;
}

double path_length_m(const PlannedPath& p) { return nmi_to_meters(p.total_length_nmi); }

void check_speeds(const PlannedPath& p, double v_max) {
    for (std::size_t i = 0; i + 1 < p.waypoints.size(); ++i) {
        CHECK(p.waypoints[i + 1].time > p.waypoints[i].time);
        CHECK(p.waypoints[i].speed <= v_max + 1e-9);
    }
}

}  // namespace

TEST_CASE("free space yields the straight line") {
    const PlannerConfig cfg;
    const auto p = plan_path({0, 0}, {1000, 0}, 0.0, {}, cfg);
    CHECK(std::abs(path_length_m(p) - 1000.0) <= cfg.effective_cell());
    CHECK(p.waypoints.front().position == Vec2{0, 0});
    CHECK(p.waypoints.back().position == Vec2{1000, 0});
    for (std::size_t i = 1; i < p.waypoints.size(); ++i) {
        CHECK(p.waypoints[i].position.x >= p.waypoints[i - 1].position.x);
    }
    check_speeds(p, cfg.v_max);
}

TEST_CASE("stationary obstacle forces a detour") {
    const PlannerConfig cfg;
    const std::vector<ObstacleTrack> obs{stationary("buoy", {500, 0})};
    const auto p = plan_path({0, 0}, {1000, 0}, 0.0, obs, cfg);
    CHECK(path_length_m(p) > 1000.0);
    for (double dt : {TimeExpandedAStar{}.time_step(cfg), 0.1, 0.01}) {
        CHECK(check_path_safety(p, obs, cfg.safe_distance, dt).empty());
    }
    CHECK(closest_approach(p, obs[0]).d_cpa >= cfg.safe_distance);
    check_speeds(p, cfg.v_max);
}

TEST_CASE("start equals goal") {
    const auto p = plan_path({10, 10}, {10, 10}, 5.0, {}, PlannerConfig{});
    REQUIRE(p.waypoints.size() == 1);
    CHECK(p.total_length_nmi == 0.0);
    CHECK(p.waypoints[0].time == 5.0);
}

TEST_CASE("crossing traffic is avoided in time") {
    const PlannerConfig cfg;
    // Crosses the straight route right when the own ship would be there.
    const std::vector<ObstacleTrack> obs{mover("ferry", {500, -600}, {0, 8}, 0, 200),
                                         mover("tug", {900, 300}, {-4, -4}, 0, 200)};
    const auto p = plan_path({0, 0}, {1000, 0}, 0.0, obs, cfg);
    for (const auto& o : obs) CHECK(closest_approach(p, o).d_cpa >= cfg.safe_distance);
    CHECK(check_path_safety(p, obs, cfg.safe_distance, 0.05).empty());
    check_speeds(p, cfg.v_max);
}

TEST_CASE("planner errors") {
    const PlannerConfig cfg;
    CHECK_THROWS_WITH_AS(plan_path({0, 0}, {NAN, 0}, 0, {}, cfg), doctest::Contains("InvalidEndpoints"), Error);
    PlannerConfig boxed;
    boxed.bounds = Bounds{{-100, -100}, {100, 100}};
    CHECK_THROWS_WITH_AS(plan_path({0, 0}, {500, 0}, 0, {}, boxed), doctest::Contains("InvalidEndpoints"), Error);
    CHECK_THROWS_WITH_AS(plan_path({0, 0}, {500, 0}, 0, {}, cfg, "hexagon"), doctest::Contains("UnknownPlanner"),
                         Error);
    // Goal sits inside an obstacle's safe zone.
    const std::vector<ObstacleTrack> blocked{stationary("rock", {500, 10})};
    CHECK_THROWS_WITH_AS(plan_path({0, 0}, {500, 0}, 0, blocked, cfg), doctest::Contains("NoPathFound"), Error);
}

TEST_CASE("registry lists the built-in planners") {
    const auto names = PlannerRegistry::instance().names();
    CHECK(std::find(names.begin(), names.end(), "time_astar") != names.end());
    CHECK(std::find(names.begin(), names.end(), "straight_line") != names.end());
    const auto baseline = plan_path({0, 0}, {300, 400}, 0, {}, PlannerConfig{}, "straight_line");
    CHECK(path_length_m(baseline) == doctest::Approx(500.0));
}

TEST_CASE("random scenes: planned paths always pass the checker") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PlannerConfig cfg;
    int planned = 0;
    for (int trial = 0; trial < 25; ++trial) {
        const Vec2 goal{600 + 400 * u(rng), 400 * u(rng) - 200};
        std::vector<ObstacleTrack> obs;
        for (int k = 0; k < 3; ++k) {
            const Vec2 p0{goal.x * u(rng), 600 * u(rng) - 300};
            const Vec2 v{8 * u(rng) - 4, 8 * u(rng) - 4};
            if (distance(p0, {0, 0}) < 80 || distance(p0, goal) < 80) continue;
            obs.push_back(mover("o" + std::to_string(k), p0, v, 0, 400));
        }
        try {
            const auto p = plan_path({0, 0}, goal, 0.0, obs, cfg);
            ++planned;
            CHECK(check_path_safety(p, obs, cfg.safe_distance, 0.1).empty());
            for (const auto& o : obs) CHECK(closest_approach(p, o).d_cpa >= cfg.safe_distance);
            check_speeds(p, cfg.v_max);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::NoPathFound);
        }
    }
    CHECK(planned >= 15);
}
