#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mass/ais.hpp"
#include "mass/geo.hpp"
#include "mass/log.hpp"

namespace mass {

struct VesselState {
    double time = 0.0;
    Vec2 position;
    double speed = 0.0;        ///< m/s
    double heading_deg = 0.0;  ///< true
};

/// Replayed obstacle: time-ordered, strictly increasing sample times.
struct ObstacleTrack {
    std::string id;  ///< MMSI, with a `#n` suffix for split segments
    std::uint32_t mmsi = 0;
    std::vector<VesselState> samples;
    std::optional<double> length_m;
    std::optional<double> beam_m;
    bool ais_equipped = true;
};

struct TrackBuildOptions {
    double max_implied_speed_mps = 30.0;
};

/// One track per MMSI; duplicate timestamps collapse (last in input order wins);
/// jumps faster than the configured speed split the track and are logged.
std::vector<ObstacleTrack> build_tracks(std::span<const ais::AisMessage> messages, const LocalFrame& frame,
                                        const TrackBuildOptions& options = {}, LogSink* log = nullptr);

/// Linear interpolation between bracketing samples; boundary positions are
/// held (speed 0) outside the sampled interval.
VesselState sample_track(const ObstacleTrack& track, double t);

}  // namespace mass
