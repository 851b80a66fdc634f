#include "mass/status.hpp"

namespace mass {

using nlohmann::ordered_json;

ordered_json to_json(Vec2 v) { return ordered_json::array({v.x, v.y}); }

ordered_json to_json(const ActuatorCommand& c) {
    return {{"thrust", c.thrust}, {"rudder_deg", c.rudder_deg}, {"emergency_stop", c.emergency_stop}};
}

ordered_json to_json(const FailoverStatus& s) {
    ordered_json degraded = ordered_json::array();
    for (const auto& c : s.degraded_components) degraded.push_back(c);
    return {{"state", to_string(s.state)},
            {"primary_power", s.primary_power},
            {"active_controller", to_string(s.active_controller)},
            {"last_primary_heartbeat", s.last_primary_heartbeat},
            {"degraded_components", degraded},
            {"time", s.time}};
}

ordered_json to_json(const Notification& n) {
    return {{"time", n.time}, {"from", to_string(n.from)}, {"to", to_string(n.to)}, {"cause", n.cause}};
}

ordered_json to_json(const SafetyViolation& v) {
    return {{"time", v.time}, {"obstacle_id", v.obstacle_id}, {"distance", v.distance}, {"threshold", v.threshold}};
}

namespace {

ordered_json fix_json(const SensorFix& f) {
    return {{"source", to_string(f.source)},
            {"available", f.available},
            {"position", f.available ? to_json(f.position) : ordered_json()},
            {"timestamp", f.timestamp},
            {"quality", f.quality == FixQuality::nominal ? "nominal" : "degraded"}};
}

}  // namespace

ordered_json to_json(const StatusSnapshot& s) {
    ordered_json detections = ordered_json::array();
    for (const auto& d : s.detections) {
        detections.push_back({{"id", d.obstacle_id},
                              {"position", to_json(d.position)},
                              {"velocity", d.velocity ? to_json(*d.velocity) : ordered_json()},
                              {"mmsi", d.mmsi ? ordered_json(*d.mmsi) : ordered_json()},
                              {"range", d.range},
                              {"source", d.source == DetectionSource::LIDAR ? "LIDAR" : "RADAR"}});
    }
    ordered_json obstacles = ordered_json::array();
    for (const auto& o : s.obstacles) {
        obstacles.push_back({{"id", o.id},
                             {"position", to_json(o.state.position)},
                             {"speed", o.state.speed},
                             {"heading_deg", o.state.heading_deg}});
    }
    ordered_json pickups = ordered_json::array();
    for (Vec2 p : s.pickup_points) pickups.push_back(to_json(p));
    ordered_json path = ordered_json::array();
    for (const auto& w : s.proposed_path.waypoints) {
        path.push_back({{"t", w.time}, {"position", to_json(w.position)}, {"speed", w.speed}});
    }

    ordered_json out;
    out["step"] = s.step;
    out["time"] = s.time;
    out["environment"] = {{"own",
                           {{"position", to_json(s.own.position)},
                            {"speed", s.own.speed},
                            {"heading_deg", s.own.heading_deg},
                            {"thrust", s.own.achieved_thrust},
                            {"rudder_deg", s.own.achieved_rudder_deg}}},
                          {"detections", detections},
                          {"obstacles", obstacles},
                          {"safe_distance", s.safe_distance},
                          {"pickup_points", pickups},
                          {"goal", to_json(s.goal)}};
    out["sensor_data"] = {{"gps", fix_json(s.gps)},
                          {"ins", fix_json(s.ins)},
                          {"nav",
                           {{"position", to_json(s.nav.position)},
                            {"source", to_string(s.nav.chosen_source)},
                            {"discrepancy", s.nav.discrepancy},
                            {"flags", flags_to_string(s.nav.flags)}}}};
    out["equipment_status"] = to_json(s.failover);
    out["proposed_path"] = path;
    out["performance_metrics"] = {
        {"nav_error_rate", s.nav_error_rate}, {"loop_latency_ms", s.loop_latency_ms}, {"miles", s.miles}};
    return out;
}

}  // namespace mass
