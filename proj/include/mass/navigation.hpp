#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mass/geo.hpp"
#include "mass/tracks.hpp"

namespace mass {

struct Waypoint {
    double time = 0.0;
    Vec2 position;
    double speed = 0.0;  ///< speed on the segment leaving this waypoint; 0 on the last
};

/// Time-parameterized own-ship plan. Waypoint times strictly increase.
struct PlannedPath {
    std::vector<Waypoint> waypoints;
    double total_length_nmi = 0.0;

    /// Builds waypoints (segment speeds, total length) from (time, position) knots.
    static PlannedPath from_knots(std::span<const std::pair<double, Vec2>> knots);

    bool empty() const { return waypoints.empty(); }
    double start_time() const { return waypoints.front().time; }
    double end_time() const { return waypoints.back().time; }
    /// Linear in time between waypoints; held at the ends.
    Vec2 position_at(double t) const;
    /// The path as a piecewise-linear trajectory.
    ObstacleTrack as_track(std::string id = "own") const;
};

struct SafetyViolation {
    double time = 0.0;
    std::string obstacle_id;
    double distance = 0.0;
    double threshold = 0.0;
};

/// Checks every instant t0 + i*dt_check up to the path end, plus the waypoint
/// times. One violation per (instant, obstacle) closer than `threshold`.
std::vector<SafetyViolation> check_path_safety(const PlannedPath& path, std::span<const ObstacleTrack> tracks,
                                               double threshold, double dt_check);

struct ClosestApproach {
    double t_cpa = 0.0;  ///< absolute time
    double d_cpa = 0.0;
};

/// Minimum separation over [t0, t1] of two piecewise-linear trajectories,
/// solved in closed form per linear piece. Earliest time wins ties.
ClosestApproach closest_approach(const ObstacleTrack& a, const ObstacleTrack& b, double t0, double t1);

/// Own path against a track over the path's interval.
ClosestApproach closest_approach(const PlannedPath& own, const ObstacleTrack& track);

/// Own ship at constant velocity from `own.time` for `horizon` seconds.
ClosestApproach closest_approach(const VesselState& own, double horizon, const ObstacleTrack& track);

/// Single linear piece: minimizes |rel_pos + rel_vel * tau| for tau in [0, duration].
/// Returns (tau, distance).
std::pair<double, double> cpa_linear(Vec2 rel_pos, Vec2 rel_vel, double duration);

}  // namespace mass
