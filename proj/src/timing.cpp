#include "mass/timing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mass/error.hpp"

namespace mass {

void TimingBudget::validate() const {
    const double fields[] = {v_own,           v_obstacle_max,  d_sensor,       d_emergency_stop,
                             t_emergency_stop, t_sensor_update, t_mech_response, t_eng_response};
    for (double f : fields) {
        if (!(f >= 0.0) || !std::isfinite(f)) throw Error(Errc::InvalidBudget, "fields must be finite and >= 0");
    }
    if (!(safety_factor >= 1.0)) throw Error(Errc::InvalidBudget, "safety_factor must be >= 1");
    if (!(d_sensor > 0.0)) throw Error(Errc::InvalidBudget, "d_sensor must be > 0");
    if (scans_for_velocity < 1) throw Error(Errc::InvalidBudget, "scans_for_velocity must be >= 1");
}

double system_response_time(const TimingBudget& b) {
    return b.scans_for_velocity * b.t_sensor_update + b.t_mech_response + b.t_eng_response + b.t_emergency_stop;
}

TimingResult min_update_rate(const TimingBudget& b) {
    b.validate();
    const double v_rel = b.v_own + b.v_obstacle_max;
    if (v_rel == 0.0) throw Error(Errc::ZeroRelativeSpeed, "v_own + v_obstacle_max is zero");

    TimingResult r;
    r.t_sys_response = system_response_time(b);
    r.t_available = (b.d_sensor / v_rel) / b.safety_factor;
    r.margin = r.t_available - r.t_sys_response;
    if (!(r.margin > 0.0)) {
        throw Error(Errc::InfeasibleBudget, "reaction window " + std::to_string(r.t_available) +
                                                " s does not cover response time " +
                                                std::to_string(r.t_sys_response) + " s");
    }
    r.min_update_rate = 1.0 / r.margin;
    return r;
}

std::uint64_t required_capacity(std::uint64_t max_recorded_obstacles, double safety_factor) {
    const double x = static_cast<double>(max_recorded_obstacles) * safety_factor;
    // Products like 10 * 1.1 land one ulp above the integer.
    return static_cast<std::uint64_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

}  // namespace mass
