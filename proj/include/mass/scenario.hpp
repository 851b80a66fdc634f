#pragma once

// Scenario files: JSON documents describing one simulated voyage (traffic,
// endpoints, budgets, faults, controllers, scripted incidents).

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "mass/dynamics.hpp"
#include "mass/failover.hpp"
#include "mass/geo.hpp"
#include "mass/planner.hpp"
#include "mass/sensors.hpp"
#include "mass/stage.hpp"
#include "mass/timing.hpp"
#include "mass/tracks.hpp"

namespace mass {

using Polygon = std::vector<Vec2>;

/// Ray-casting point-in-polygon; boundary points count as inside.
bool point_in_polygon(Vec2 p, const Polygon& poly);

enum class ScriptedKind {
    heartbeat_stall,
    rogue_command,
    component_fault,
    component_restore,
    override_engage,
    override_release,
    helm,
};

struct ScriptedEvent {
    ScriptedKind kind = ScriptedKind::heartbeat_stall;
    double time = 0.0;
    double duration = std::numeric_limits<double>::infinity();
    std::string component;    ///< lidar | radar | gps | ins | ais
    ActuatorCommand command;  ///< helm, rogue_command
};

struct ControllerParams {
    /// Added to safe_distance when planning so tracking error stays outside the safe zone.
    double planning_margin = 20.0;
    double lookahead_s = 3.0;
    double rudder_gain = 1.0;
    double replan_deviation = 40.0;
    double replan_cooldown = 5.0;
    /// Brake with emergency_stop when this far above the wanted speed.
    double brake_excess = 3.0;
    double arrival_radius = 10.0;
    int healthy_beats_to_restore = 50;
    bool restore_primary = true;
};

struct MetricsConfig {
    double nav_accuracy = 25.0;
    double collision_distance = 5.0;
};

struct ScenarioSpec {
    std::string id;
    std::filesystem::path source;
    LatLon origin;
    std::vector<ObstacleTrack> tracks;

    Vec2 start;
    double start_heading_deg = 0.0;
    Vec2 goal;
    double safe_distance = 50.0;

    TimingBudget timing;
    HullParams hull;
    FaultModel faults;
    SensorSuite sensors;
    double cross_check_threshold = 20.0;
    KinematicLimits kinematic_limits;

    std::vector<Vec2> pickup_points;
    std::string planner = "time_astar";
    PlannerConfig planner_config;
    ControllerParams controller;
    WatchdogConfig watchdog;
    BackupConfig backup;
    std::string backup_version = "backup-1.0";

    std::uint64_t rng_seed = 0;
    Stage stage = Stage::PATH_SIM;
    double timeout_s = 3600.0;
    std::vector<Polygon> port_polygons;
    std::vector<ScriptedEvent> events;
    MetricsConfig metrics;

    /// Hash of the controller-side configuration plus the declared code version.
    std::string software_version;
};

/// The code version folded into every software_version hash.
std::string_view code_version();

/// Hex SHA-256 over the canonical dump of `controller_identity` and the code version.
std::string software_version_of(const nlohmann::json& controller_identity);

/// Timing-budget object (same keys as a scenario's "timing" section). Throws Error{ScenarioLoadError}.
TimingBudget parse_timing_budget(const nlohmann::json& doc);

/// Parses a scenario document. Relative file references resolve against `base_dir`.
/// Throws Error{ScenarioLoadError}.
ScenarioSpec parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir, LogSink* log = nullptr);

/// Throws Error{ScenarioLoadError}.
ScenarioSpec load_scenario(const std::filesystem::path& path, LogSink* log = nullptr);

}  // namespace mass
