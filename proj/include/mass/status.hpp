#pragma once

// Per-step monitoring snapshot published to the console, and the JSON codecs
// shared by reports, the ledger file and the console API.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mass/dynamics.hpp"
#include "mass/failover.hpp"
#include "mass/navigation.hpp"
#include "mass/sensors.hpp"

namespace mass {

struct ObstacleView {
    std::string id;
    VesselState state;
};

struct StatusSnapshot {
    std::uint64_t step = 0;
    double time = 0.0;

    OwnShipState own;
    std::vector<Detection> detections;
    std::vector<ObstacleView> obstacles;
    double safe_distance = 0.0;
    std::vector<Vec2> pickup_points;
    Vec2 goal;

    SensorFix gps;
    SensorFix ins;
    NavSolution nav;

    FailoverStatus failover;
    PlannedPath proposed_path;

    double nav_error_rate = 0.0;
    double loop_latency_ms = 0.0;
    double miles = 0.0;
};

nlohmann::ordered_json to_json(Vec2 v);
nlohmann::ordered_json to_json(const ActuatorCommand& c);
nlohmann::ordered_json to_json(const FailoverStatus& s);
nlohmann::ordered_json to_json(const Notification& n);
nlohmann::ordered_json to_json(const SafetyViolation& v);
nlohmann::ordered_json to_json(const StatusSnapshot& s);

}  // namespace mass
