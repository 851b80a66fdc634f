#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mass/dynamics.hpp"
#include "mass/geo.hpp"
#include "mass/tracks.hpp"

namespace mass {

enum class FixSource { GPS, INS, DEAD_RECKONING };
enum class FixQuality { nominal, degraded };

std::string_view to_string(FixSource s);

struct SensorFix {
    FixSource source = FixSource::GPS;
    Vec2 position;  ///< meaningless when !available
    double timestamp = 0.0;
    bool available = true;
    FixQuality quality = FixQuality::nominal;
};

struct FaultModel {
    /// Horizontal (2D RMS) GPS error, meters.
    double gps_noise_sigma = 2.0;
    Vec2 gps_spoof_offset;
    std::optional<TimeWindow> gps_spoof_window;
    std::optional<TimeWindow> gps_jam_window;
    double ins_drift_rate_nmi_per_hr = 0.0;  ///< [0, 10]
    double ins_drift_heading_deg = 0.0;
    std::uint64_t rng_seed = 0;

    /// Throws Error{ScenarioLoadError} on out-of-range rates or inverted windows.
    void validate() const;
};

enum NavFlag : unsigned {
    SPOOF_SUSPECT = 1u << 0,
    INS_DRIFT_SUSPECT = 1u << 1,
    FALLBACK = 1u << 2,
    RECALIBRATED = 1u << 3,
};

/// Flags that mark a step as a navigation error (RECALIBRATED is routine).
inline constexpr unsigned kNavAlertFlags = SPOOF_SUSPECT | INS_DRIFT_SUSPECT | FALLBACK;

std::string flags_to_string(unsigned flags);

struct NavSolution {
    Vec2 position;
    FixSource chosen_source = FixSource::GPS;
    double discrepancy = 0.0;
    unsigned flags = 0;

    bool has(NavFlag f) const { return (flags & f) != 0; }
};

struct KinematicLimits {
    double max_speed = 15.0;
    /// Position noise allowance when converting a jump into an implied speed.
    double position_tolerance = 20.0;
    /// Optional; disabled by default.
    std::optional<double> max_accel;
};

struct CrossVerifyInput {
    SensorFix gps;
    SensorFix ins;
    NavSolution last;
    double last_speed = 0.0;        ///< speed log
    double last_heading_deg = 0.0;  ///< compass
    double dt = 0.1;
    double threshold = 20.0;
    KinematicLimits limits;
};

struct NavAlert {
    double time = 0.0;
    double discrepancy = 0.0;
    FixSource chosen = FixSource::GPS;
    unsigned flags = 0;
};

/// Deterministic per (seed, t) noise; spoof offset and jam window applied.
SensorFix gps_read(const OwnShipState& truth, const FaultModel& faults, double t);

/// truth + drift of rate * elapsed along the configured heading. Degraded once
/// the drift exceeds `degraded_above_m`.
SensorFix ins_read(const OwnShipState& truth, const FaultModel& faults, double elapsed_since_calibration,
                   double degraded_above_m = 20.0);

/// GPS/INS cross-check. Discrepancies above threshold are appended to `alerts`.
NavSolution cross_verify(const CrossVerifyInput& in, std::vector<NavAlert>* alerts = nullptr);

struct SensorSuite {
    double lidar_range = 100.0;
    double radar_range = 5000.0;
    double ais_range = nmi_to_meters(20.0);
    /// Interval between the two lidar scans used for velocity.
    double scan_interval = 0.2;
    bool lidar_operational = true;
    bool radar_operational = true;

    bool all_inoperative() const { return !lidar_operational && !radar_operational; }
};

enum class DetectionSource { LIDAR, RADAR };

struct Detection {
    std::string obstacle_id;
    Vec2 position;
    std::optional<Vec2> velocity;
    std::optional<std::uint32_t> mmsi;
    double range = 0.0;
    DetectionSource source = DetectionSource::RADAR;
};

/// Geometric detection model: lidar range gives position and a two-scan
/// velocity estimate, radar range gives position only.
std::vector<Detection> detect_obstacles(std::span<const ObstacleTrack> tracks, const OwnShipState& own, double t,
                                        const SensorSuite& suite);

}  // namespace mass
