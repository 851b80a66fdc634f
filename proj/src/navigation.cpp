#include "mass/navigation.hpp"

#include <algorithm>
#include <limits>

namespace mass {

PlannedPath PlannedPath::from_knots(std::span<const std::pair<double, Vec2>> knots) {
    PlannedPath p;
    double length_m = 0.0;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        Waypoint w{knots[i].first, knots[i].second, 0.0};
        if (i + 1 < knots.size()) {
            const double seg = distance(knots[i].second, knots[i + 1].second);
            w.speed = seg / (knots[i + 1].first - knots[i].first);
            length_m += seg;
        }
        p.waypoints.push_back(w);
    }
    p.total_length_nmi = meters_to_nmi(length_m);
    return p;
}

Vec2 PlannedPath::position_at(double t) const {
    if (waypoints.empty()) return {};
    if (t <= waypoints.front().time) return waypoints.front().position;
    if (t >= waypoints.back().time) return waypoints.back().position;
    const auto it = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                                     [](double time, const Waypoint& w) { return time < w.time; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    return lerp(a.position, b.position, (t - a.time) / (b.time - a.time));
}

ObstacleTrack PlannedPath::as_track(std::string id) const {
    ObstacleTrack t;
    t.id = std::move(id);
    t.ais_equipped = false;
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
        const auto& w = waypoints[i];
        double heading = 0.0;
        if (i + 1 < waypoints.size()) {
            const Vec2 d = waypoints[i + 1].position - w.position;
            if (d.norm() > 0.0) heading = bearing_deg(d);
        }
        t.samples.push_back(VesselState{w.time, w.position, w.speed, heading});
    }
    return t;
}

std::vector<SafetyViolation> check_path_safety(const PlannedPath& path, std::span<const ObstacleTrack> tracks,
                                               double threshold, double dt_check) {
    std::vector<SafetyViolation> out;
    if (path.empty() || tracks.empty()) return out;

    std::vector<double> instants;
    const double t0 = path.start_time();
    const double t1 = path.end_time();
    for (std::size_t i = 0;; ++i) {
        const double t = t0 + static_cast<double>(i) * dt_check;
        if (t > t1) break;
        instants.push_back(t);
    }
    for (const auto& w : path.waypoints) instants.push_back(w.time);
    std::sort(instants.begin(), instants.end());
    instants.erase(std::unique(instants.begin(), instants.end()), instants.end());

    for (double t : instants) {
        const Vec2 own = path.position_at(t);
        for (const auto& track : tracks) {
            const double d = distance(own, sample_track(track, t).position);
            if (d < threshold) out.push_back({t, track.id, d, threshold});
        }
    }
    return out;
}

std::pair<double, double> cpa_linear(Vec2 rel_pos, Vec2 rel_vel, double duration) {
    const double vv = rel_vel.dot(rel_vel);
    double tau = 0.0;
    if (vv > 0.0) tau = std::clamp(-rel_pos.dot(rel_vel) / vv, 0.0, std::max(0.0, duration));
    return {tau, (rel_pos + rel_vel * tau).norm()};
}

ClosestApproach closest_approach(const ObstacleTrack& a, const ObstacleTrack& b, double t0, double t1) {
    t1 = std::max(t0, t1);
    std::vector<double> breaks{t0, t1};
    for (const auto* tr : {&a, &b}) {
        for (const auto& s : tr->samples) {
            if (s.time > t0 && s.time < t1) breaks.push_back(s.time);
        }
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    ClosestApproach best{t0, std::numeric_limits<double>::infinity()};
    if (breaks.size() == 1) {
        best.d_cpa = distance(sample_track(a, t0).position, sample_track(b, t0).position);
        return best;
    }
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double ta = breaks[i];
        const double tb = breaks[i + 1];
        const Vec2 r0 = sample_track(a, ta).position - sample_track(b, ta).position;
        const Vec2 r1 = sample_track(a, tb).position - sample_track(b, tb).position;
        const auto [tau, d] = cpa_linear(r0, (r1 - r0) / (tb - ta), tb - ta);
        if (d < best.d_cpa) best = {ta + tau, d};
    }
    return best;
}

ClosestApproach closest_approach(const PlannedPath& own, const ObstacleTrack& track) {
    if (own.empty()) return {0.0, std::numeric_limits<double>::infinity()};
    return closest_approach(own.as_track(), track, own.start_time(), own.end_time());
}

ClosestApproach closest_approach(const VesselState& own, double horizon, const ObstacleTrack& track) {
    ObstacleTrack self;
    self.id = "own";
    self.samples.push_back(own);
    if (horizon > 0.0) {
        VesselState end = own;
        end.time = own.time + horizon;
        end.position = own.position + heading_vector(own.heading_deg) * (own.speed * horizon);
        self.samples.push_back(end);
    }
    return closest_approach(self, track, own.time, own.time + std::max(0.0, horizon));
}

}  // namespace mass
