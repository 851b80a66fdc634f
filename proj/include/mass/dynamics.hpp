#pragma once

#include "mass/geo.hpp"
#include "mass/timing.hpp"

namespace mass {

struct HullParams {
    double v_max = 10.0;            ///< m/s at full thrust
    double rudder_limit_deg = 35.0;
    /// Turn rate per unit rudder per unit speed: deg/s per (deg * m/s).
    double turn_gain = 0.05;
    /// Surge time constant near full speed; sets the quadratic drag coefficient.
    double surge_time_constant = 5.0;
    double t_eng_response = 0.5;    ///< thrust lag
    double t_mech_response = 0.5;   ///< rudder lag
    double estop_decel = 10.2;      ///< m/s^2 under emergency stop
};

/// Lag constants from the budget; emergency deceleration sized so that a stop
/// from budget.v_own fits inside both d_emergency_stop and t_emergency_stop.
HullParams hull_from_budget(const TimingBudget& budget, HullParams base = {});

struct OwnShipState {
    Vec2 position;
    double speed = 0.0;
    double heading_deg = 0.0;
    double achieved_thrust = 0.0;  ///< [0, 1]
    double achieved_rudder_deg = 0.0;
    double time = 0.0;
};

struct ActuatorCommand {
    double thrust = 0.0;  ///< [0, 1]
    double rudder_deg = 0.0;
    bool emergency_stop = false;

    bool operator==(const ActuatorCommand&) const = default;
};

/// One forward-Euler step. Throws Error{NegativeDt}.
OwnShipState step(const OwnShipState& state, const ActuatorCommand& command, double dt, const HullParams& hull);

}  // namespace mass
