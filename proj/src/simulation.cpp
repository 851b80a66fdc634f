#include "mass/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "mass/error.hpp"
#include "mass/planner.hpp"
#include "mass/timing.hpp"

namespace mass {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Outcome o) {
    switch (o) {
    case Outcome::goal_reached: return "goal_reached";
    case Outcome::pickup_reached: return "pickup_reached";
    case Outcome::timeout: return "timeout";
    case Outcome::collision: return "collision";
    case Outcome::error: return "error";
    }
    return "?";
}

std::optional<Outcome> parse_outcome(std::string_view s) {
    for (Outcome o : {Outcome::goal_reached, Outcome::pickup_reached, Outcome::timeout, Outcome::collision,
                      Outcome::error}) {
        if (to_string(o) == s) return o;
    }
    return std::nullopt;
}

bool RunResult::failed() const {
    return !violations.empty() || !(outcome == Outcome::goal_reached || outcome == Outcome::pickup_reached);
}

ordered_json to_json(const RunResult& r) {
    ordered_json violations = ordered_json::array();
    for (const auto& v : r.violations) violations.push_back(to_json(v));
    ordered_json events = ordered_json::array();
    for (const auto& e : r.failover_events) events.push_back(to_json(e));
    ordered_json j;
    j["scenario_id"] = r.scenario_id;
    j["software_version"] = r.software_version;
    j["backup_software_version"] = r.backup_software_version;
    j["stage"] = to_string(r.stage);
    j["seed"] = r.seed;
    j["outcome"] = to_string(r.outcome);
    j["miles"] = r.miles;
    j["duration"] = r.duration;
    j["total_steps"] = r.total_steps;
    j["nav_error_steps"] = r.nav_error_steps;
    j["critical_downtime"] = r.critical_downtime;
    j["port_operations"] = r.port_operations;
    j["min_separation"] = std::isfinite(r.min_separation) ? ordered_json(r.min_separation) : ordered_json();
    j["violations"] = violations;
    j["collisions"] = r.collisions;
    j["failover_events"] = events;
    j["level1_events"] = r.level1_events;
    j["level2_events"] = r.level2_events;
    j["nav_alerts"] = r.nav_alerts;
    j["final_state"] = to_string(r.final_state);
    j["final_controller"] = to_string(r.final_controller);
    j["replans"] = r.replans;
    return j;
}

namespace {

template <class E, std::size_t N>
E enum_from(const json& j, const char* key, const E (&all)[N]) {
    const auto s = j.at(key).get<std::string>();
    for (E e : all) {
        if (to_string(e) == s) return e;
    }
    throw Error(Errc::LedgerCorrupt, std::string("bad ") + key + " '" + s + "'");
}

constexpr ControlState kStates[] = {ControlState::NORMAL, ControlState::DEGRADED_L1, ControlState::BACKUP_CONTROL_L2,
                                    ControlState::MANUAL_OVERRIDE};
constexpr ActiveController kControllers[] = {ActiveController::primary, ActiveController::backup,
                                             ActiveController::human};

}  // namespace

RunResult run_result_from_json(const json& j) {
    try {
        RunResult r;
        r.scenario_id = j.at("scenario_id").get<std::string>();
        r.software_version = j.at("software_version").get<std::string>();
        r.backup_software_version = j.at("backup_software_version").get<std::string>();
        r.stage = enum_from(j, "stage", kAllStages);
        r.seed = j.at("seed").get<std::uint64_t>();
        const auto outcome = parse_outcome(j.at("outcome").get<std::string>());
        if (!outcome) throw Error(Errc::LedgerCorrupt, "bad outcome");
        r.outcome = *outcome;
        r.miles = j.at("miles").get<double>();
        r.duration = j.at("duration").get<double>();
        r.total_steps = j.at("total_steps").get<std::uint64_t>();
        r.nav_error_steps = j.at("nav_error_steps").get<std::uint64_t>();
        r.critical_downtime = j.at("critical_downtime").get<double>();
        r.port_operations = j.at("port_operations").get<std::uint64_t>();
        r.min_separation = j.at("min_separation").is_null() ? std::numeric_limits<double>::infinity()
                                                            : j.at("min_separation").get<double>();
        for (const auto& v : j.at("violations")) {
            r.violations.push_back({v.at("time").get<double>(), v.at("obstacle_id").get<std::string>(),
                                    v.at("distance").get<double>(), v.at("threshold").get<double>()});
        }
        r.collisions = j.at("collisions").get<std::uint64_t>();
        for (const auto& e : j.at("failover_events")) {
            r.failover_events.push_back({e.at("time").get<double>(), enum_from(e, "from", kStates),
                                         enum_from(e, "to", kStates), e.at("cause").get<std::string>()});
        }
        r.level1_events = j.at("level1_events").get<std::uint64_t>();
        r.level2_events = j.at("level2_events").get<std::uint64_t>();
        r.nav_alerts = j.at("nav_alerts").get<std::uint64_t>();
        r.final_state = enum_from(j, "final_state", kStates);
        r.final_controller = enum_from(j, "final_controller", kControllers);
        r.replans = j.at("replans").get<std::uint64_t>();
        if (r.miles < 0.0 || r.nav_error_steps > r.total_steps) throw Error(Errc::LedgerCorrupt, "inconsistent record");
        return r;
    } catch (const json::exception& e) {
        throw Error(Errc::LedgerCorrupt, e.what());
    }
}

namespace {

struct Window {
    double start = 0.0;
    double end = 0.0;
    ActuatorCommand command;

    bool contains(double t) const { return t >= start && t < end; }
};

// Scripted incidents resolved against the step clock.
class Script {
public:
    explicit Script(const std::vector<ScriptedEvent>& events) : events_(events) {}

    // Applies everything due at or before t; override-type events are returned.
    std::vector<OverrideRequest> advance(double t) {
        std::vector<OverrideRequest> overrides;
        const double due = t + 1e-9;
        while (next_ < events_.size() && events_[next_].time <= due) {
            const auto& e = events_[next_++];
            switch (e.kind) {
            case ScriptedKind::heartbeat_stall:
                stalls_.push_back({e.time, e.time + e.duration, {}});
                break;
            case ScriptedKind::rogue_command:
                rogues_.push_back({e.time, e.time + e.duration, e.command});
                break;
            case ScriptedKind::component_fault:
                faulted_.insert(e.component);
                if (std::isfinite(e.duration)) restores_.push_back({e.time + e.duration, e.component});
                break;
            case ScriptedKind::component_restore:
                faulted_.erase(e.component);
                break;
            case ScriptedKind::override_engage:
                overrides.push_back({OverrideRequest::Kind::engage, {}, "script"});
                break;
            case ScriptedKind::override_release:
                overrides.push_back({OverrideRequest::Kind::release, {}, "script"});
                break;
            case ScriptedKind::helm:
                overrides.push_back({OverrideRequest::Kind::helm, e.command, "script"});
                break;
            }
        }
        for (auto it = restores_.begin(); it != restores_.end();) {
            if (it->first <= due) {
                faulted_.erase(it->second);
                it = restores_.erase(it);
            } else {
                ++it;
            }
        }
        return overrides;
    }

    bool stalled(double t) const {
        return std::any_of(stalls_.begin(), stalls_.end(), [&](const Window& w) { return w.contains(t); });
    }

    std::optional<ActuatorCommand> rogue(double t) const {
        for (const auto& w : rogues_) {
            if (w.contains(t)) return w.command;
        }
        return std::nullopt;
    }

    const std::set<std::string>& faulted() const { return faulted_; }

private:
    const std::vector<ScriptedEvent>& events_;
    std::size_t next_ = 0;
    std::vector<Window> stalls_;
    std::vector<Window> rogues_;
    std::vector<std::pair<double, std::string>> restores_;
    std::set<std::string> faulted_;
};

bool primary_in_control(ControlState s) { return s == ControlState::NORMAL || s == ControlState::DEGRADED_L1; }

bool in_any_port(Vec2 p, const std::vector<Polygon>& ports) {
    return std::any_of(ports.begin(), ports.end(), [&](const Polygon& poly) { return point_in_polygon(p, poly); });
}

class PathFollower {
public:
    PathFollower(const ControllerParams& params, const HullParams& hull) : p_(params), hull_(hull) {}

    ActuatorCommand command(const PlannedPath& path, Vec2 nav, const OwnShipState& own, double t) const {
        ActuatorCommand cmd;
        if (path.empty()) {
            cmd.emergency_stop = true;
            return cmd;
        }
        const Vec2 to = path.position_at(t + p_.lookahead_s) - nav;
        const double dist = to.norm();
        const double desired = std::min(hull_.v_max, dist / p_.lookahead_s);
        if (dist > 1e-6) {
            const double error = wrap180(bearing_deg(to) - own.heading_deg);
            cmd.rudder_deg = std::clamp(p_.rudder_gain * error, -hull_.rudder_limit_deg, hull_.rudder_limit_deg);
            // A target inside the full-rudder turning circle cannot be reached by
            // turning toward it; hold course until it falls outside.
            const double along = dist * std::cos(deg2rad(error));
            const double across = dist * std::abs(std::sin(deg2rad(error)));
            const double radius = turning_radius() * 1.1;
            if (along * along + (across - radius) * (across - radius) < radius * radius) cmd.rudder_deg = 0.0;
        }
        cmd.thrust = desired / hull_.v_max;
        if (own.speed > desired + p_.brake_excess) cmd.emergency_stop = true;
        return cmd;
    }

private:
    double turning_radius() const {
        const double per_meter = deg2rad(hull_.turn_gain * hull_.rudder_limit_deg);
        return per_meter > 0.0 ? 1.0 / per_meter : 0.0;
    }

    ControllerParams p_;
    HullParams hull_;
};

}  // namespace

RunResult run_scenario(const ScenarioSpec& spec, const SimulationHooks& hooks) {
    const TimingResult timing = min_update_rate(spec.timing);
    const double rate = timing.min_update_rate;
    const double dt = 1.0 / rate;
    const auto max_steps = static_cast<std::uint64_t>(std::ceil(spec.timeout_s * rate - 1e-9));

    RunResult r;
    r.scenario_id = spec.id;
    r.software_version = spec.software_version;
    r.backup_software_version = spec.backup_version;
    r.stage = spec.stage;
    r.seed = spec.rng_seed;
    r.min_separation = std::numeric_limits<double>::infinity();
    if (in_any_port(spec.start, spec.port_polygons)) ++r.port_operations;

    OwnShipState own;
    own.position = spec.start;
    own.heading_deg = spec.start_heading_deg;

    FailoverStatus fs;
    HeartbeatHistory beats;
    beats.last_primary = 0.0;
    NavSolution nav;
    nav.position = spec.start;
    double calibrated_at = 0.0;
    Vec2 ins_ref_error;

    Script script(spec.events);
    std::set<std::string> known_faulted;
    SensorSuite suite = spec.sensors;

    const std::unique_ptr<PathPlanner> planner = PlannerRegistry::instance().create(spec.planner);
    const PathFollower follower(spec.controller, spec.hull);
    const BackupController backup(spec.backup_version, spec.backup);
    PlannedPath path;
    bool need_plan = true;
    double last_plan = -std::numeric_limits<double>::infinity();
    Vec2 backup_target = spec.goal;
    int healthy_beats = 0;

    ActuatorCommand applied;
    std::optional<ActuatorCommand> helm;
    std::vector<NavAlert> alerts;

    auto apply = [&](const FailoverEvent& e) {
        std::vector<Notification> notes;
        const ControlState before = fs.state;
        fs = transition(fs, e, &notes);
        if (e.kind == EventKind::ComponentFault) ++r.level1_events;
        if (fs.state == ControlState::BACKUP_CONTROL_L2 && before != ControlState::BACKUP_CONTROL_L2) {
            ++r.level2_events;
            backup_target = safe_mode_target(nav.position, spec.pickup_points);
            healthy_beats = 0;
        }
        if (primary_in_control(fs.state) && !primary_in_control(before)) need_plan = true;
        if (fs.state == ControlState::MANUAL_OVERRIDE && before != ControlState::MANUAL_OVERRIDE) helm.reset();
        for (const auto& n : notes) {
            r.failover_events.push_back(n);
            if (hooks.on_transition) hooks.on_transition(n);
        }
    };

    auto plan = [&](double t) {
        last_plan = t;
        need_plan = false;
        PlannerConfig cfg = spec.planner_config;
        for (double margin : {spec.controller.planning_margin, 0.0}) {
            cfg.safe_distance = spec.safe_distance + margin;
            try {
                PlannedPath p = planner->plan(nav.position, spec.goal, t, spec.tracks, cfg);
                if (!check_path_safety(p, spec.tracks, cfg.safe_distance, planner->time_step(cfg)).empty()) continue;
                path = std::move(p);
                ++r.replans;
                return;
            } catch (const Error& e) {
                if (e.code() != Errc::NoPathFound && e.code() != Errc::InvalidEndpoints) throw;
            }
        }
        // Keep the previous path; with none the follower holds position.
    };

    bool done = false;
    for (std::uint64_t n = 0; n < max_steps && !done; ++n) {
        const double t = static_cast<double>(n) * dt;
        const auto wall_start = std::chrono::steady_clock::now();

        std::vector<OverrideRequest> overrides = script.advance(t);
        if (hooks.drain_overrides) {
            auto live = hooks.drain_overrides(t);
            overrides.insert(overrides.end(), live.begin(), live.end());
        }
        for (const auto& o : overrides) {
            switch (o.kind) {
            case OverrideRequest::Kind::engage:
                apply({EventKind::OverrideEngaged, t, {}, std::nullopt});
                break;
            case OverrideRequest::Kind::release:
                apply({EventKind::OverrideReleased, t, {}, std::nullopt});
                helm.reset();
                break;
            case OverrideRequest::Kind::helm:
                if (fs.state == ControlState::MANUAL_OVERRIDE) helm = o.command;
                break;
            }
        }

        const auto& faulted = script.faulted();
        for (const auto& c : faulted) {
            if (!known_faulted.count(c)) apply({EventKind::ComponentFault, t, c, std::nullopt});
        }
        for (const auto& c : known_faulted) {
            if (!faulted.count(c)) apply({EventKind::ComponentRestored, t, c, std::nullopt});
        }
        known_faulted = faulted;
        suite.lidar_operational = !faulted.count("lidar");
        suite.radar_operational = !faulted.count("radar");

        std::vector<Detection> detections = detect_obstacles(spec.tracks, own, t, suite);
        if (faulted.count("ais")) {
            for (auto& d : detections) d.mmsi.reset();
        }

        SensorFix gps = gps_read(own, spec.faults, t);
        if (faulted.count("gps")) gps.available = false;
        SensorFix ins = ins_read(own, spec.faults, t - calibrated_at);
        ins.position += ins_ref_error;
        if (faulted.count("ins")) ins.available = false;

        CrossVerifyInput cv;
        cv.gps = gps;
        cv.ins = ins;
        cv.last = nav;
        cv.last_speed = own.speed;
        cv.last_heading_deg = own.heading_deg;
        cv.dt = dt;
        cv.threshold = spec.cross_check_threshold;
        cv.limits = spec.kinematic_limits;
        const std::size_t alerts_before = alerts.size();
        nav = cross_verify(cv, &alerts);
        r.nav_alerts += alerts.size() - alerts_before;
        if (gps.available && nav.chosen_source == FixSource::GPS) {
            // The INS is re-referenced to every accepted GPS fix.
            ins_ref_error = gps.position - own.position;
            calibrated_at = t;
        }

        if ((nav.flags & kNavAlertFlags) || distance(nav.position, own.position) > spec.metrics.nav_accuracy) {
            ++r.nav_error_steps;
        }
        if (nav.has(FALLBACK) || suite.all_inoperative()) r.critical_downtime += dt;

        const bool stalled = script.stalled(t);
        const auto rogue = script.rogue(t);
        const bool alive = fs.primary_power && !stalled;
        if (alive) {
            beats.last_primary = t;
            fs.last_primary_heartbeat = t;
        }

        std::optional<ActuatorCommand> primary_cmd;
        if (alive && primary_in_control(fs.state)) {
            const bool exhausted = !path.empty() && t > path.end_time() &&
                                   distance(nav.position, spec.goal) > spec.controller.arrival_radius;
            const bool deviated = !path.empty() && distance(nav.position, path.position_at(t)) >
                                                       spec.controller.replan_deviation;
            if (need_plan || ((path.empty() || exhausted || deviated) &&
                              t - last_plan >= spec.controller.replan_cooldown)) {
                plan(t);
            }
            primary_cmd = rogue ? *rogue : follower.command(path, nav.position, own, t);
        }

        if (primary_in_control(fs.state)) {
            for (const auto& e :
                 watchdog_evaluate(beats, primary_cmd, own, detections, rate, t, spec.watchdog)) {
                apply(e);
            }
        }

        if (fs.state == ControlState::BACKUP_CONTROL_L2 && spec.controller.restore_primary) {
            healthy_beats = (!stalled && !rogue) ? healthy_beats + 1 : 0;
            if (healthy_beats >= spec.controller.healthy_beats_to_restore) {
                apply({EventKind::PrimaryHealthyConfirmed, t, {}, std::nullopt});
            }
        }

        ActuatorCommand cmd = applied;
        switch (fs.active_controller) {
        case ActiveController::primary:
            if (alive && primary_cmd) cmd = *primary_cmd;
            break;
        case ActiveController::backup:
            cmd = backup.command(own, nav, detections, backup_target);
            break;
        case ActiveController::human:
            cmd = helm.value_or(applied);
            break;
        }
        applied = cmd;

        const Vec2 before = own.position;
        own = step(own, cmd, dt, spec.hull);
        r.miles += meters_to_nmi(distance(before, own.position));

        const double t_next = static_cast<double>(n + 1) * dt;
        bool collided = false;
        for (const auto& track : spec.tracks) {
            const double d = distance(own.position, sample_track(track, t_next).position);
            r.min_separation = std::min(r.min_separation, d);
            if (d < spec.safe_distance) r.violations.push_back({t_next, track.id, d, spec.safe_distance});
            if (d < spec.metrics.collision_distance) {
                ++r.collisions;
                collided = true;
            }
        }
        ++r.total_steps;
        r.duration = t_next;

        if (hooks.on_step) {
            StatusSnapshot snap;
            snap.step = n + 1;
            snap.time = t_next;
            snap.own = own;
            snap.own.time = t_next;
            snap.detections = std::move(detections);
            for (const auto& track : spec.tracks) snap.obstacles.push_back({track.id, sample_track(track, t_next)});
            snap.safe_distance = spec.safe_distance;
            snap.pickup_points = spec.pickup_points;
            snap.goal = spec.goal;
            snap.gps = gps;
            snap.ins = ins;
            snap.nav = nav;
            snap.failover = fs;
            snap.proposed_path = path;
            snap.nav_error_rate = static_cast<double>(r.nav_error_steps) / static_cast<double>(r.total_steps);
            snap.loop_latency_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wall_start).count();
            snap.miles = r.miles;
            hooks.on_step(snap);
        }

        if (collided) {
            r.outcome = Outcome::collision;
            done = true;
        } else if (primary_in_control(fs.state) &&
                   distance(own.position, spec.goal) <= spec.controller.arrival_radius) {
            r.outcome = Outcome::goal_reached;
            if (in_any_port(own.position, spec.port_polygons)) ++r.port_operations;
            done = true;
        } else if (fs.state == ControlState::BACKUP_CONTROL_L2 &&
                   distance(own.position, backup_target) <= spec.controller.arrival_radius && own.speed == 0.0) {
            r.outcome = Outcome::pickup_reached;
            done = true;
        }
        if (!done && hooks.should_stop && hooks.should_stop()) done = true;
        if (!done && hooks.pace) hooks.pace(t_next);
    }

    r.final_state = fs.state;
    r.final_controller = fs.active_controller;
    return r;
}

CapacityCheck capacity_check(const ScenarioSpec& spec) {
    std::vector<std::pair<double, int>> edges;
    for (const auto& track : spec.tracks) {
        if (track.samples.empty()) continue;
        edges.push_back({track.samples.front().time, +1});
        edges.push_back({track.samples.back().time, -1});
    }
    // Arrivals before departures at equal times so touching intervals overlap.
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second > b.second;
    });
    CapacityCheck c;
    std::int64_t live = 0;
    for (const auto& [time, delta] : edges) {
        live += delta;
        c.max_recorded_obstacles = std::max<std::uint64_t>(c.max_recorded_obstacles, static_cast<std::uint64_t>(live));
    }
    c.required = required_capacity(c.max_recorded_obstacles, spec.timing.safety_factor);
    return c;
}

}  // namespace mass
