#include "mass/sensors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "mass/error.hpp"

namespace mass {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Uniform in (0, 1) from a counter-based hash, so noise depends only on (seed, t, stream).
double uniform01(std::uint64_t seed, double t, std::uint64_t stream) {
    const std::uint64_t h = splitmix64(splitmix64(seed ^ splitmix64(std::bit_cast<std::uint64_t>(t))) + stream);
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

Vec2 gaussian2(std::uint64_t seed, double t, double sigma_per_axis) {
    const double u1 = uniform01(seed, t, 1);
    const double u2 = uniform01(seed, t, 2);
    const double r = std::sqrt(-2.0 * std::log(u1)) * sigma_per_axis;
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace

std::string_view to_string(FixSource s) {
    switch (s) {
    case FixSource::GPS: return "GPS";
    case FixSource::INS: return "INS";
    case FixSource::DEAD_RECKONING: return "DEAD_RECKONING";
    }
    return "?";
}

std::string flags_to_string(unsigned flags) {
    std::string out;
    auto add = [&](NavFlag f, const char* name) {
        if (flags & f) {
            if (!out.empty()) out += '|';
            out += name;
        }
    };
    add(SPOOF_SUSPECT, "SPOOF_SUSPECT");
    add(INS_DRIFT_SUSPECT, "INS_DRIFT_SUSPECT");
    add(FALLBACK, "FALLBACK");
    add(RECALIBRATED, "RECALIBRATED");
    return out;
}

void FaultModel::validate() const {
    if (!(gps_noise_sigma >= 0.0)) throw Error(Errc::ScenarioLoadError, "gps_noise_sigma must be >= 0");
    if (!(ins_drift_rate_nmi_per_hr >= 0.0 && ins_drift_rate_nmi_per_hr <= 10.0)) {
        throw Error(Errc::ScenarioLoadError, "ins_drift_rate must lie in [0, 10] nmi/hr");
    }
    for (const auto& w : {gps_spoof_window, gps_jam_window}) {
        if (w && !(w->start <= w->end)) throw Error(Errc::ScenarioLoadError, "fault window start after end");
    }
}

SensorFix gps_read(const OwnShipState& truth, const FaultModel& faults, double t) {
    SensorFix fix;
    fix.source = FixSource::GPS;
    fix.timestamp = t;
    if (faults.gps_jam_window && faults.gps_jam_window->contains(t)) {
        fix.available = false;
        return fix;
    }
    fix.position = truth.position;
    if (faults.gps_spoof_window && faults.gps_spoof_window->contains(t)) fix.position += faults.gps_spoof_offset;
    if (faults.gps_noise_sigma > 0.0) {
        fix.position += gaussian2(faults.rng_seed, t, faults.gps_noise_sigma / std::sqrt(2.0));
    }
    return fix;
}

SensorFix ins_read(const OwnShipState& truth, const FaultModel& faults, double elapsed, double degraded_above_m) {
    SensorFix fix;
    fix.source = FixSource::INS;
    fix.timestamp = truth.time;
    const double drift_m = faults.ins_drift_rate_nmi_per_hr * (elapsed / kSecondsPerHour) * kMetersPerNauticalMile;
    fix.position = truth.position + heading_vector(faults.ins_drift_heading_deg) * drift_m;
    fix.quality = drift_m > degraded_above_m ? FixQuality::degraded : FixQuality::nominal;
    return fix;
}

NavSolution cross_verify(const CrossVerifyInput& in, std::vector<NavAlert>* alerts) {
    const Vec2 predicted = in.last.position + heading_vector(in.last_heading_deg) * (in.last_speed * in.dt);

    auto kinematically_plausible = [&](Vec2 fix) {
        const double jump = std::max(0.0, distance(fix, in.last.position) - in.limits.position_tolerance);
        const double implied = jump / in.dt;
        if (implied > in.limits.max_speed) return false;
        if (in.limits.max_accel && std::abs(implied - in.last_speed) / in.dt > *in.limits.max_accel) return false;
        return true;
    };

    NavSolution out;
    const double t = in.gps.available ? in.gps.timestamp : in.ins.timestamp;

    if (in.gps.available && in.ins.available) {
        out.discrepancy = distance(in.gps.position, in.ins.position);
        if (out.discrepancy <= in.threshold) {
            out.position = in.gps.position;
            out.chosen_source = FixSource::GPS;
            if (out.discrepancy > 0.0) out.flags |= RECALIBRATED;
        } else {
            const bool gps_ok = kinematically_plausible(in.gps.position);
            const bool ins_ok = kinematically_plausible(in.ins.position);
            const double gps_err = distance(in.gps.position, predicted);
            const double ins_err = distance(in.ins.position, predicted);
            const bool pick_gps = gps_ok && (!ins_ok || gps_err <= ins_err);
            const bool pick_ins = !pick_gps && ins_ok;
            if (pick_gps) {
                out.position = in.gps.position;
                out.chosen_source = FixSource::GPS;
                out.flags |= INS_DRIFT_SUSPECT;
            } else if (pick_ins) {
                out.position = in.ins.position;
                out.chosen_source = FixSource::INS;
                out.flags |= SPOOF_SUSPECT;
            } else {
                out.position = predicted;
                out.chosen_source = FixSource::DEAD_RECKONING;
                out.flags |= FALLBACK | SPOOF_SUSPECT | INS_DRIFT_SUSPECT;
            }
        }
    } else if (in.gps.available) {
        out.position = in.gps.position;
        out.chosen_source = FixSource::GPS;
    } else if (in.ins.available) {
        out.position = in.ins.position;
        out.chosen_source = FixSource::INS;
    } else {
        out.position = predicted;
        out.chosen_source = FixSource::DEAD_RECKONING;
        out.flags |= FALLBACK;
    }

    if (alerts && (out.flags & kNavAlertFlags)) alerts->push_back({t, out.discrepancy, out.chosen_source, out.flags});
    return out;
}

std::vector<Detection> detect_obstacles(std::span<const ObstacleTrack> tracks, const OwnShipState& own, double t,
                                        const SensorSuite& suite) {
    std::vector<Detection> out;
    for (const auto& track : tracks) {
        const VesselState s = sample_track(track, t);
        const double range = distance(s.position, own.position);
        Detection d;
        d.obstacle_id = track.id;
        d.position = s.position;
        d.range = range;
        if (suite.lidar_operational && range <= suite.lidar_range) {
            d.source = DetectionSource::LIDAR;
            const Vec2 earlier = sample_track(track, t - suite.scan_interval).position;
            d.velocity = (s.position - earlier) / suite.scan_interval;
        } else if (suite.radar_operational && range <= suite.radar_range) {
            d.source = DetectionSource::RADAR;
        } else {
            continue;
        }
        if (track.ais_equipped && range <= suite.ais_range) d.mmsi = track.mmsi;
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace mass
