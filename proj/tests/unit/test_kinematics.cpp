#include <doctest.h>

#include <cmath>
#include <random>

#include "mass/dynamics.hpp"
#include "mass/error.hpp"
#include "mass/timing.hpp"

using namespace mass;

namespace {

TimingBudget lags(double sensor, double mech, double eng, double stop) {
    TimingBudget b;
    b.t_sensor_update = sensor;
    b.t_mech_response = mech;
    b.t_eng_response = eng;
    b.t_emergency_stop = stop;
    return b;
}

bool same(const OwnShipState& a, const OwnShipState& b) {
    return a.position == b.position && a.speed == b.speed && a.heading_deg == b.heading_deg &&
           a.achieved_thrust == b.achieved_thrust && a.achieved_rudder_deg == b.achieved_rudder_deg &&
           a.time == b.time;
}

}  // namespace

TEST_CASE("system response time") {
    CHECK(system_response_time(lags(0.2, 0.5, 0.5, 1.0)) == 2.4);
    CHECK(system_response_time(lags(0, 0, 0, 0)) == 0.0);
    CHECK(system_response_time(lags(0.1, 0.3, 0.2, 0.5)) == doctest::Approx(1.2).epsilon(1e-12));
    TimingBudget three = lags(0.2, 0.5, 0.5, 1.0);
    three.scans_for_velocity = 3;
    CHECK(system_response_time(three) == doctest::Approx(2.6).epsilon(1e-12));
}

TEST_CASE("minimum update rate") {
    SUBCASE("worked example") {
        const auto r = min_update_rate(TimingBudget{});
        CHECK(r.t_available == 2.5);
        CHECK(r.margin == doctest::Approx(0.1).epsilon(1e-9));
        CHECK(r.min_update_rate == doctest::Approx(10.0).epsilon(1e-9));
    }
    SUBCASE("zero lags") {
        const auto r = min_update_rate(lags(0, 0, 0, 0));
        CHECK(r.margin == 2.5);
        CHECK(r.min_update_rate == doctest::Approx(0.4).epsilon(1e-12));
    }
    SUBCASE("slower own ship, longer range") {
        TimingBudget b = lags(0.1, 0.3, 0.2, 0.5);
        b.v_own = 5;
        b.v_obstacle_max = 15;
        b.d_sensor = 200;
        const auto r = min_update_rate(b);
        CHECK(r.t_available == 5.0);
        CHECK(r.margin == doctest::Approx(3.8).epsilon(1e-12));
        CHECK(r.min_update_rate == doctest::Approx(1.0 / 3.8).epsilon(1e-12));
    }
    SUBCASE("errors") {
        TimingBudget still;
        still.v_own = 0;
        still.v_obstacle_max = 0;
        CHECK_THROWS_WITH_AS(min_update_rate(still), doctest::Contains("ZeroRelativeSpeed"), Error);
        CHECK_THROWS_WITH_AS(min_update_rate(lags(0.2, 0.5, 0.5, 1.1)), doctest::Contains("InfeasibleBudget"), Error);
        TimingBudget bad;
        bad.safety_factor = 0.5;
        CHECK_THROWS_WITH_AS(min_update_rate(bad), doctest::Contains("InvalidBudget"), Error);
    }
}

TEST_CASE("lag terms are monotone") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 0.4);
    for (int i = 0; i < 500; ++i) {
        TimingBudget b = lags(u(rng), u(rng), u(rng), u(rng));
        const double t0 = system_response_time(b);
        const double m0 = (b.d_sensor / (b.v_own + b.v_obstacle_max)) / b.safety_factor - t0;
        TimingBudget c = b;
        switch (i % 4) {
        case 0: c.t_sensor_update += u(rng); break;
        case 1: c.t_mech_response += u(rng); break;
        case 2: c.t_eng_response += u(rng); break;
        default: c.t_emergency_stop += u(rng); break;
        }
        const double t1 = system_response_time(c);
        CHECK(t1 >= t0);
        CHECK((c.d_sensor / (c.v_own + c.v_obstacle_max)) / c.safety_factor - t1 <= m0);
    }
}

TEST_CASE("required capacity") {
    CHECK(required_capacity(120, 2.0) == 240);
    CHECK(required_capacity(0, 2.0) == 0);
    CHECK(required_capacity(7, 1.5) == 11);
    CHECK(required_capacity(10, 1.1) == 11);
}

TEST_CASE("step basics") {
    const HullParams hull;
    OwnShipState s;
    s.position = {3, 4};
    s.speed = 5;
    s.heading_deg = 30;
    CHECK(same(step(s, {1.0, 10.0, false}, 0.0, hull), s));
    CHECK_THROWS_WITH_AS(step(s, {}, -0.1, hull), doctest::Contains("NegativeDt"), Error);

    OwnShipState rest;
    OwnShipState n = step(rest, {}, 0.7, hull);
    rest.time = 0.7;
    CHECK(same(n, rest));
}

TEST_CASE("thrust lag follows the analytic first-order response") {
    const HullParams hull;
    for (double dt : {0.1, 0.05, 0.01, 0.001}) {
        OwnShipState s;
        const int n = static_cast<int>(std::lround(0.5 / dt));
        for (int i = 0; i < n; ++i) s = step(s, {1.0, 0.0, false}, dt, hull);
        const double exact = 1.0 - std::exp(-1.0);
        CAPTURE(dt);
        CHECK(std::abs(s.achieved_thrust - exact) < 0.01);
    }
}

TEST_CASE("steady state speed and turning") {
    const HullParams hull;
    OwnShipState s;
    for (int i = 0; i < 6000; ++i) s = step(s, {0.7, 0.0, false}, 0.05, hull);
    CHECK(s.speed == doctest::Approx(7.0).epsilon(1e-6));
    CHECK(s.heading_deg == 0.0);
    CHECK(s.position.x == 0.0);

    OwnShipState turning = s;
    for (int i = 0; i < 20; ++i) turning = step(turning, {0.7, 10.0, false}, 0.05, hull);
    CHECK(turning.heading_deg > 0.0);
    CHECK(turning.achieved_rudder_deg <= hull.rudder_limit_deg);

    OwnShipState clamp = s;
    for (int i = 0; i < 200; ++i) clamp = step(clamp, {2.0, 90.0, false}, 0.05, hull);
    CHECK(clamp.achieved_thrust <= 1.0);
    CHECK(clamp.achieved_rudder_deg <= hull.rudder_limit_deg);
}

TEST_CASE("step is deterministic and time additive") {
    const HullParams hull;
    OwnShipState s;
    s.speed = 6;
    s.achieved_thrust = 0.5;
    s.heading_deg = 45;
    const ActuatorCommand cmd{0.9, 15.0, false};
    CHECK(same(step(s, cmd, 0.1, hull), step(s, cmd, 0.1, hull)));
    for (double dt : {0.02, 0.01, 0.005}) {
        const auto two = step(step(s, cmd, dt, hull), cmd, dt, hull);
        const auto one = step(s, cmd, 2 * dt, hull);
        const double err = distance(two.position, one.position) + std::abs(two.speed - one.speed) +
                           std::abs(two.heading_deg - one.heading_deg) +
                           std::abs(two.achieved_thrust - one.achieved_thrust);
        CAPTURE(dt);
        CHECK(err < 60.0 * dt * dt);
    }
}

TEST_CASE("emergency stop fits the budget") {
    const TimingBudget budget;
    const HullParams hull = hull_from_budget(budget);
    for (double dt : {0.1, 0.05, 0.01}) {
        OwnShipState s;
        s.speed = budget.v_own;
        s.achieved_thrust = 1.0;
        double t = 0.0;
        while (s.speed > 0.0) {
            s = step(s, {1.0, 0.0, true}, dt, hull);
            t += dt;
            REQUIRE(t < 10.0);
        }
        CAPTURE(dt);
        CHECK(t <= budget.t_emergency_stop + 1e-9);
        CHECK(s.position.norm() <= budget.d_emergency_stop);
    }
}
