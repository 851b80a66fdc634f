#include "mass/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mass/error.hpp"

namespace mass {

namespace {

// Headroom over the exact deceleration so Euler round-off never overshoots the budget.
constexpr double kStopMargin = 1.02;

// Exact first-order lag for a command held over the step.
double lag_fraction(double dt, double tau) { return tau > 0.0 ? -std::expm1(-dt / tau) : 1.0; }

}  // namespace

HullParams hull_from_budget(const TimingBudget& budget, HullParams base) {
    base.t_eng_response = budget.t_eng_response;
    base.t_mech_response = budget.t_mech_response;
    const double v = budget.v_own;
    const double inf = std::numeric_limits<double>::infinity();
    const double by_time = budget.t_emergency_stop > 0.0 ? v / budget.t_emergency_stop : inf;
    const double by_distance = budget.d_emergency_stop > 0.0 ? v * v / (2.0 * budget.d_emergency_stop) : inf;
    const double need = std::max(by_time, by_distance);
    if (std::isfinite(need) && need > 0.0) base.estop_decel = kStopMargin * need;
    return base;
}

OwnShipState step(const OwnShipState& s, const ActuatorCommand& cmd, double dt, const HullParams& hull) {
    if (dt < 0.0) throw Error(Errc::NegativeDt, "dt = " + std::to_string(dt));
    if (dt == 0.0) return s;

    const double thrust_cmd = cmd.emergency_stop ? 0.0 : std::clamp(cmd.thrust, 0.0, 1.0);
    const double rudder_cmd = std::clamp(cmd.rudder_deg, -hull.rudder_limit_deg, hull.rudder_limit_deg);

    OwnShipState n = s;
    n.time = s.time + dt;
    n.position = s.position + heading_vector(s.heading_deg) * (s.speed * dt);
    n.heading_deg = wrap360(s.heading_deg + hull.turn_gain * s.achieved_rudder_deg * s.speed * dt);

    if (cmd.emergency_stop) {
        n.speed = std::max(0.0, s.speed - hull.estop_decel * dt);
    } else {
        // Propulsive term balances drag at thrust * v_max.
        const double drag_coeff = 1.0 / (2.0 * hull.v_max * hull.surge_time_constant);
        const double target = s.achieved_thrust * hull.v_max;
        n.speed = std::max(0.0, s.speed + drag_coeff * (target * target - s.speed * s.speed) * dt);
    }

    n.achieved_thrust = s.achieved_thrust + (thrust_cmd - s.achieved_thrust) * lag_fraction(dt, hull.t_eng_response);
    n.achieved_rudder_deg =
        s.achieved_rudder_deg + (rudder_cmd - s.achieved_rudder_deg) * lag_fraction(dt, hull.t_mech_response);
    return n;
}

}  // namespace mass
