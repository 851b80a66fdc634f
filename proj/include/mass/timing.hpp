#pragma once

#include <cstdint>

namespace mass {

/// Control-loop timing budget. Speeds in m/s, distances in meters, times in seconds.
struct TimingBudget {
    double v_own = 10.0;
    double v_obstacle_max = 10.0;
    double d_sensor = 100.0;
    double d_emergency_stop = 10.0;
    double t_emergency_stop = 1.0;
    double t_sensor_update = 0.2;
    double t_mech_response = 0.5;
    double t_eng_response = 0.5;
    double safety_factor = 2.0;
    /// Consecutive scans needed for a velocity vector.
    int scans_for_velocity = 2;

    /// Throws Error{InvalidBudget} on negative fields, SF < 1 or d_sensor <= 0.
    void validate() const;
};

struct TimingResult {
    double t_sys_response = 0.0;
    double t_available = 0.0;
    double margin = 0.0;
    double min_update_rate = 0.0;  ///< Hz
};

/// scans * t_sensor_update + t_mech + t_eng + t_emergency_stop.
double system_response_time(const TimingBudget& budget);

/// Throws Error{ZeroRelativeSpeed} when v_own + v_obstacle_max == 0 and
/// Error{InfeasibleBudget} when the margin is not positive.
TimingResult min_update_rate(const TimingBudget& budget);

/// ceil(max_recorded * safety_factor): obstacles the controller must process per cycle.
std::uint64_t required_capacity(std::uint64_t max_recorded_obstacles, double safety_factor);

}  // namespace mass
