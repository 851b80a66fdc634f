#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mass/geo.hpp"
#include "mass/navigation.hpp"
#include "mass/tracks.hpp"

namespace mass {

struct Bounds {
    Vec2 min;
    Vec2 max;

    bool contains(Vec2 p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
};

struct PlannerConfig {
    double safe_distance = 50.0;
    /// Grid cell edge; 0 means safe_distance / 2.
    double cell_size = 0.0;
    double cruise_speed = 7.0;
    double v_max = 10.0;
    /// Search horizon in seconds; 0 picks one from the straight-line time.
    double max_duration = 0.0;
    /// Scenario box; when unset, the start/goal box grown by bounds_margin.
    std::optional<Bounds> bounds;
    double bounds_margin = 500.0;
    std::size_t max_expansions = 2'000'000;

    double effective_cell() const { return cell_size > 0.0 ? cell_size : (safe_distance > 0.0 ? safe_distance / 2.0 : 25.0); }
};

class PathPlanner {
public:
    virtual ~PathPlanner() = default;
    virtual std::string_view name() const = 0;
    /// Time step the planner discretizes on (the natural dt_check for its output).
    virtual double time_step(const PlannerConfig& config) const = 0;
    /// Throws Error{NoPathFound | InvalidEndpoints}.
    virtual PlannedPath plan(Vec2 start, Vec2 goal, double t0, std::span<const ObstacleTrack> tracks,
                             const PlannerConfig& config) const = 0;
};

/// Space-time A* over (x, y, t) cells. Edges are accepted only when the exact
/// closest approach to every obstacle over the edge stays at or above the safe distance.
class TimeExpandedAStar final : public PathPlanner {
public:
    std::string_view name() const override { return "time_astar"; }
    double time_step(const PlannerConfig& config) const override;
    PlannedPath plan(Vec2 start, Vec2 goal, double t0, std::span<const ObstacleTrack> tracks,
                     const PlannerConfig& config) const override;
};

/// Direct line at cruise speed, no avoidance. Baseline for checker tests.
class StraightLinePlanner final : public PathPlanner {
public:
    std::string_view name() const override { return "straight_line"; }
    double time_step(const PlannerConfig& config) const override;
    PlannedPath plan(Vec2 start, Vec2 goal, double t0, std::span<const ObstacleTrack> tracks,
                     const PlannerConfig& config) const override;
};

class PlannerRegistry {
public:
    using Factory = std::function<std::unique_ptr<PathPlanner>()>;

    /// Pre-populated with time_astar and straight_line.
    static PlannerRegistry& instance();

    void add(std::string name, Factory factory);
    /// Throws Error{UnknownPlanner}.
    std::unique_ptr<PathPlanner> create(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    PlannerRegistry();
    std::map<std::string, Factory, std::less<>> factories_;
};

/// Plans with the named planner and confirms the result with check_path_safety
/// at the safe distance and the planner's time step. Throws Error{NoPathFound}
/// if the confirmation fails.
PlannedPath plan_path(Vec2 start, Vec2 goal, double t0, std::span<const ObstacleTrack> tracks,
                      const PlannerConfig& config, std::string_view planner = "time_astar");

}  // namespace mass
