#include "mass/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "mass/ais.hpp"
#include "mass/error.hpp"

#ifndef MASS_CODE_VERSION
#define MASS_CODE_VERSION "0.0.0"
#endif

namespace mass {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(Errc::ScenarioLoadError, what); }

void expect_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            fail(where + ": unknown key '" + key + "'");
        }
    }
}

double number(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(std::string("'") + key + "' must be a number");
    return v.get<double>();
}

template <class T>
T get_as(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(std::string("'") + key + "' has the wrong type");
    }
}

class PointReader {
public:
    explicit PointReader(const std::optional<LocalFrame>& frame) : frame_(frame) {}

    Vec2 operator()(const json& v, const std::string& where) const {
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
            return {v[0].get<double>(), v[1].get<double>()};
        }
        if (v.is_object() && v.contains("x") && v.contains("y")) {
            return {number(v, "x", 0.0), number(v, "y", 0.0)};
        }
        if (v.is_object() && v.contains("lat") && v.contains("lon")) {
            if (!frame_) fail(where + ": lat/lon positions need an 'origin'");
            return frame_->to_local({number(v, "lat", 0.0), number(v, "lon", 0.0)});
        }
        fail(where + ": expected [x, y], {x, y} or {lat, lon}");
    }

private:
    const std::optional<LocalFrame>& frame_;
};

std::optional<TimeWindow> window(const json& v, const std::string& where) {
    if (v.is_null()) return std::nullopt;
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        fail(where + ": window must be [start, end]");
    }
    TimeWindow w{v[0].get<double>(), v[1].get<double>()};
    if (!(w.start <= w.end)) fail(where + ": window start after end");
    return w;
}

TimingBudget parse_timing_impl(const json& j) {
    expect_keys(j, "timing",
                {"v_own", "v_obstacle_max", "d_sensor", "d_emergency_stop", "t_emergency_stop", "t_sensor_update",
                 "t_mech_response", "t_eng_response", "safety_factor", "scans_for_velocity"});
    TimingBudget b;
    b.v_own = number(j, "v_own", b.v_own);
    b.v_obstacle_max = number(j, "v_obstacle_max", b.v_obstacle_max);
    b.d_sensor = number(j, "d_sensor", b.d_sensor);
    b.d_emergency_stop = number(j, "d_emergency_stop", b.d_emergency_stop);
    b.t_emergency_stop = number(j, "t_emergency_stop", b.t_emergency_stop);
    b.t_sensor_update = number(j, "t_sensor_update", b.t_sensor_update);
    b.t_mech_response = number(j, "t_mech_response", b.t_mech_response);
    b.t_eng_response = number(j, "t_eng_response", b.t_eng_response);
    b.safety_factor = number(j, "safety_factor", b.safety_factor);
    b.scans_for_velocity = get_as<int>(j, "scans_for_velocity", b.scans_for_velocity);
    try {
        b.validate();
    } catch (const Error& e) {
        fail(std::string("timing: ") + e.what());
    }
    return b;
}

std::vector<ObstacleTrack> load_traffic(const json& j, const std::filesystem::path& base, const LocalFrame* frame,
                                        const PointReader& point, LogSink* log) {
    expect_keys(j, "traffic", {"file", "format", "epoch", "max_implied_speed", "tracks"});
    std::vector<ObstacleTrack> tracks;
    if (j.contains("file")) {
        if (!frame) fail("traffic: a traffic file needs an 'origin'");
        const std::filesystem::path file = base / get_as<std::string>(j, "file", "");
        std::ifstream in(file);
        if (!in) fail("traffic: cannot open " + file.string());
        std::string format = get_as<std::string>(j, "format", "");
        if (format.empty()) format = file.extension() == ".csv" ? "csv" : "nmea";
        std::vector<ais::AisMessage> msgs;
        if (format == "csv") {
            msgs = ais::read_csv(in, log);
        } else if (format == "nmea") {
            msgs = ais::read_nmea(in, log);
        } else {
            fail("traffic: unknown format '" + format + "'");
        }
        std::optional<double> epoch;
        if (j.contains("epoch")) {
            epoch = number(j, "epoch", 0.0);
        } else if (format == "csv") {
            epoch = 0.0;
        }
        msgs = ais::normalize_timestamps(std::move(msgs), epoch, log);
        TrackBuildOptions opts;
        opts.max_implied_speed_mps = number(j, "max_implied_speed", opts.max_implied_speed_mps);
        tracks = build_tracks(msgs, *frame, opts, log);
    }
    if (j.contains("tracks")) {
        for (const auto& t : j.at("tracks")) {
            expect_keys(t, "traffic.tracks[]", {"id", "mmsi", "samples", "ais"});
            ObstacleTrack tr;
            tr.id = get_as<std::string>(t, "id", "");
            if (tr.id.empty()) fail("traffic.tracks[]: missing id");
            tr.mmsi = get_as<std::uint32_t>(t, "mmsi", 0);
            tr.ais_equipped = get_as<bool>(t, "ais", tr.mmsi != 0);
            for (const auto& s : t.at("samples")) {
                // [t, x, y] or {t, position}
                VesselState v;
                if (s.is_array() && s.size() == 3) {
                    v.time = s[0].get<double>();
                    v.position = {s[1].get<double>(), s[2].get<double>()};
                } else if (s.is_object()) {
                    v.time = number(s, "t", 0.0);
                    v.position = point(s.at("position"), "traffic.tracks[].samples[]");
                } else {
                    fail("traffic.tracks[].samples[]: expected [t, x, y] or {t, position}");
                }
                if (!tr.samples.empty() && !(v.time > tr.samples.back().time)) {
                    fail("traffic.tracks[" + tr.id + "]: sample times must strictly increase");
                }
                tr.samples.push_back(v);
            }
            if (tr.samples.empty()) fail("traffic.tracks[" + tr.id + "]: no samples");
            for (std::size_t i = 0; i + 1 < tr.samples.size(); ++i) {
                auto& a = tr.samples[i];
                const auto& b = tr.samples[i + 1];
                const Vec2 d = b.position - a.position;
                a.speed = d.norm() / (b.time - a.time);
                a.heading_deg = d.norm() > 0.0 ? bearing_deg(d) : 0.0;
            }
            tracks.push_back(std::move(tr));
        }
    }
    return tracks;
}

ScriptedEvent parse_event(const json& e) {
    expect_keys(e, "events[]", {"t", "kind", "duration", "component", "thrust", "rudder_deg", "emergency_stop"});
    static const std::pair<const char*, ScriptedKind> kinds[] = {
        {"heartbeat_stall", ScriptedKind::heartbeat_stall},     {"rogue_command", ScriptedKind::rogue_command},
        {"component_fault", ScriptedKind::component_fault},     {"component_restore", ScriptedKind::component_restore},
        {"override_engage", ScriptedKind::override_engage},     {"override_release", ScriptedKind::override_release},
        {"helm", ScriptedKind::helm},
    };
    ScriptedEvent ev;
    const auto kind = get_as<std::string>(e, "kind", "");
    const auto it = std::find_if(std::begin(kinds), std::end(kinds), [&](const auto& k) { return kind == k.first; });
    if (it == std::end(kinds)) fail("events[]: unknown kind '" + kind + "'");
    ev.kind = it->second;
    if (!e.contains("t")) fail("events[]: missing 't'");
    ev.time = number(e, "t", 0.0);
    ev.duration = number(e, "duration", ev.duration);
    if (!(ev.duration > 0.0)) fail("events[]: duration must be positive");
    ev.component = get_as<std::string>(e, "component", "");
    static const std::set<std::string> components{"lidar", "radar", "gps", "ins", "ais"};
    if ((ev.kind == ScriptedKind::component_fault || ev.kind == ScriptedKind::component_restore) &&
        !components.count(ev.component)) {
        fail("events[]: unknown component '" + ev.component + "'");
    }
    ev.command.thrust = number(e, "thrust", 0.0);
    ev.command.rudder_deg = number(e, "rudder_deg", 0.0);
    ev.command.emergency_stop = get_as<bool>(e, "emergency_stop", false);
    return ev;
}

}  // namespace

bool point_in_polygon(Vec2 p, const Polygon& poly) {
    if (poly.size() < 3) return false;
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[j];
        // On-edge test first so boundary points are deterministic.
        const Vec2 ab = b - a;
        const Vec2 ap = p - a;
        const double cross = ab.x * ap.y - ab.y * ap.x;
        if (cross == 0.0 && ap.dot(ab) >= 0.0 && ap.dot(ab) <= ab.dot(ab)) return true;
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

TimingBudget parse_timing_budget(const json& doc) { return parse_timing_impl(doc); }

std::string_view code_version() { return MASS_CODE_VERSION; }

std::string software_version_of(const json& controller_identity) {
    const json doc = {{"code_version", std::string(code_version())}, {"controller", controller_identity}};
    const std::string canonical = doc.dump();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(canonical.data(), canonical.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(Errc::ScenarioLoadError, "SHA-256 unavailable");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

ScenarioSpec parse_scenario(const json& doc, const std::filesystem::path& base_dir, LogSink* log) {
    expect_keys(doc, "scenario",
                {"id", "origin", "traffic", "start", "start_heading", "goal", "safe_distance", "timing", "hull",
                 "faults", "sensors", "cross_check", "pickup_points", "planner", "controller", "backup", "rng_seed",
                 "stage", "timeout_s", "port_polygons", "events", "metrics"});
    ScenarioSpec s;
    s.id = get_as<std::string>(doc, "id", "");
    if (s.id.empty()) fail("missing 'id'");
    if (!doc.contains("rng_seed") || !doc.at("rng_seed").is_number_integer()) {
        fail("'rng_seed' is required and must be an integer");
    }
    s.rng_seed = doc.at("rng_seed").get<std::uint64_t>();

    std::optional<LocalFrame> frame;
    if (doc.contains("origin")) {
        const auto& o = doc.at("origin");
        expect_keys(o, "origin", {"lat", "lon"});
        s.origin = {number(o, "lat", 0.0), number(o, "lon", 0.0)};
        frame = LocalFrame(s.origin);
    }
    const PointReader point(frame);

    if (!doc.contains("start") || !doc.contains("goal")) fail("'start' and 'goal' are required");
    s.start = point(doc.at("start"), "start");
    s.goal = point(doc.at("goal"), "goal");
    s.start_heading_deg =
        doc.contains("start_heading") ? wrap360(number(doc, "start_heading", 0.0)) : bearing_deg(s.goal - s.start);
    s.safe_distance = number(doc, "safe_distance", s.safe_distance);
    if (!(s.safe_distance > 0.0)) fail("safe_distance must be positive");

    if (doc.contains("traffic")) {
        s.tracks = load_traffic(doc.at("traffic"), base_dir, frame ? &*frame : nullptr, point, log);
    }

    s.timing = doc.contains("timing") ? parse_timing_impl(doc.at("timing")) : TimingBudget{};
    HullParams hull;
    if (doc.contains("hull")) {
        const auto& h = doc.at("hull");
        expect_keys(h, "hull", {"v_max", "rudder_limit_deg", "turn_gain", "surge_time_constant", "estop_decel"});
        hull.v_max = number(h, "v_max", hull.v_max);
        hull.rudder_limit_deg = number(h, "rudder_limit_deg", hull.rudder_limit_deg);
        hull.turn_gain = number(h, "turn_gain", hull.turn_gain);
        hull.surge_time_constant = number(h, "surge_time_constant", hull.surge_time_constant);
    }
    s.hull = hull_from_budget(s.timing, hull);
    if (doc.contains("hull") && doc.at("hull").contains("estop_decel")) {
        s.hull.estop_decel = number(doc.at("hull"), "estop_decel", s.hull.estop_decel);
    }
    if (!(s.hull.v_max > 0.0)) fail("hull.v_max must be positive");

    s.faults.rng_seed = s.rng_seed;
    if (doc.contains("faults")) {
        const auto& f = doc.at("faults");
        expect_keys(f, "faults",
                    {"gps_noise_sigma", "gps_spoof_offset", "gps_spoof_window", "gps_jam_window", "ins_drift_rate",
                     "ins_drift_heading"});
        s.faults.gps_noise_sigma = number(f, "gps_noise_sigma", s.faults.gps_noise_sigma);
        if (f.contains("gps_spoof_offset")) s.faults.gps_spoof_offset = point(f.at("gps_spoof_offset"), "faults");
        if (f.contains("gps_spoof_window")) s.faults.gps_spoof_window = window(f.at("gps_spoof_window"), "faults");
        if (f.contains("gps_jam_window")) s.faults.gps_jam_window = window(f.at("gps_jam_window"), "faults");
        s.faults.ins_drift_rate_nmi_per_hr = number(f, "ins_drift_rate", 0.0);
        s.faults.ins_drift_heading_deg = number(f, "ins_drift_heading", 0.0);
    }
    s.faults.validate();

    if (doc.contains("sensors")) {
        const auto& j = doc.at("sensors");
        expect_keys(j, "sensors", {"lidar_range", "radar_range", "ais_range_nmi", "scan_interval"});
        s.sensors.lidar_range = number(j, "lidar_range", s.sensors.lidar_range);
        s.sensors.radar_range = number(j, "radar_range", s.sensors.radar_range);
        s.sensors.ais_range = nmi_to_meters(number(j, "ais_range_nmi", meters_to_nmi(s.sensors.ais_range)));
        s.sensors.scan_interval = number(j, "scan_interval", s.timing.t_sensor_update);
    } else {
        s.sensors.scan_interval = s.timing.t_sensor_update;
    }
    if (!(s.sensors.lidar_range < s.sensors.radar_range)) fail("sensors: lidar_range must be below radar_range");

    json identity = json::object();
    if (doc.contains("cross_check")) {
        const auto& j = doc.at("cross_check");
        expect_keys(j, "cross_check", {"threshold", "max_speed", "position_tolerance", "max_accel"});
        s.cross_check_threshold = number(j, "threshold", s.cross_check_threshold);
        s.kinematic_limits.max_speed = number(j, "max_speed", s.kinematic_limits.max_speed);
        s.kinematic_limits.position_tolerance = number(j, "position_tolerance", s.cross_check_threshold);
        if (j.contains("max_accel") && !j.at("max_accel").is_null()) {
            s.kinematic_limits.max_accel = number(j, "max_accel", 0.0);
        }
        identity["cross_check"] = j;
    } else {
        s.kinematic_limits.position_tolerance = s.cross_check_threshold;
    }

    if (!doc.contains("pickup_points") || doc.at("pickup_points").empty()) {
        fail("at least one pickup point is required");
    }
    for (const auto& p : doc.at("pickup_points")) s.pickup_points.push_back(point(p, "pickup_points[]"));

    if (doc.contains("planner")) {
        const auto& j = doc.at("planner");
        expect_keys(j, "planner", {"name", "params"});
        s.planner = get_as<std::string>(j, "name", s.planner);
        if (j.contains("params")) {
            const auto& p = j.at("params");
            expect_keys(p, "planner.params",
                        {"cell_size", "cruise_speed", "max_duration", "bounds_margin", "max_expansions"});
            s.planner_config.cell_size = number(p, "cell_size", 0.0);
            s.planner_config.cruise_speed = number(p, "cruise_speed", s.planner_config.cruise_speed);
            s.planner_config.max_duration = number(p, "max_duration", 0.0);
            s.planner_config.bounds_margin = number(p, "bounds_margin", s.planner_config.bounds_margin);
            s.planner_config.max_expansions = get_as<std::size_t>(p, "max_expansions", s.planner_config.max_expansions);
        }
        identity["planner"] = j;
    }
    try {
        (void)PlannerRegistry::instance().create(s.planner);
    } catch (const Error& e) {
        fail(std::string("planner: ") + e.what());
    }
    identity["planner_name"] = s.planner;
    s.planner_config.v_max = s.hull.v_max;
    if (!(s.planner_config.cruise_speed > 0.0 && s.planner_config.cruise_speed <= s.hull.v_max)) {
        fail("planner cruise_speed must lie in (0, v_max]");
    }

    s.watchdog.vet_distance = 0.5 * s.safe_distance;
    if (doc.contains("controller")) {
        const auto& j = doc.at("controller");
        expect_keys(j, "controller",
                    {"planning_margin", "lookahead_s", "rudder_gain", "replan_deviation", "replan_cooldown",
                     "brake_excess", "arrival_radius", "healthy_beats_to_restore", "restore_primary", "missed_beats",
                     "vet_horizon", "vet_distance", "vet_dt"});
        auto& c = s.controller;
        c.planning_margin = number(j, "planning_margin", c.planning_margin);
        c.lookahead_s = number(j, "lookahead_s", c.lookahead_s);
        c.rudder_gain = number(j, "rudder_gain", c.rudder_gain);
        c.replan_deviation = number(j, "replan_deviation", c.replan_deviation);
        c.replan_cooldown = number(j, "replan_cooldown", c.replan_cooldown);
        c.brake_excess = number(j, "brake_excess", c.brake_excess);
        c.arrival_radius = number(j, "arrival_radius", c.arrival_radius);
        c.healthy_beats_to_restore = get_as<int>(j, "healthy_beats_to_restore", c.healthy_beats_to_restore);
        c.restore_primary = get_as<bool>(j, "restore_primary", c.restore_primary);
        s.watchdog.missed_beats = get_as<int>(j, "missed_beats", s.watchdog.missed_beats);
        s.watchdog.vet_horizon = number(j, "vet_horizon", s.watchdog.vet_horizon);
        s.watchdog.vet_distance = number(j, "vet_distance", s.watchdog.vet_distance);
        s.watchdog.vet_dt = number(j, "vet_dt", s.watchdog.vet_dt);
        identity["controller"] = j;
    }
    if (s.watchdog.missed_beats < 1) fail("controller.missed_beats must be >= 1");
    if (!(s.watchdog.vet_horizon > 0.0 && s.watchdog.vet_dt > 0.0)) fail("controller: vet horizon and dt must be > 0");
    if (!(s.controller.lookahead_s > 0.0)) fail("controller.lookahead_s must be > 0");
    s.watchdog.hull = s.hull;

    s.backup.safe_distance = s.safe_distance;
    s.backup.rudder_limit_deg = s.hull.rudder_limit_deg;
    s.backup.arrival_radius = s.controller.arrival_radius;
    if (doc.contains("backup")) {
        const auto& j = doc.at("backup");
        expect_keys(j, "backup", {"software_version", "speed_fraction", "rudder_gain", "arrival_radius"});
        s.backup_version = get_as<std::string>(j, "software_version", s.backup_version);
        s.backup.speed_fraction = number(j, "speed_fraction", s.backup.speed_fraction);
        s.backup.rudder_gain = number(j, "rudder_gain", s.backup.rudder_gain);
        s.backup.arrival_radius = number(j, "arrival_radius", s.backup.arrival_radius);
        identity["backup"] = j;
    }
    identity["backup_software_version"] = s.backup_version;

    if (doc.contains("stage")) {
        const auto st = parse_stage(get_as<std::string>(doc, "stage", ""));
        if (!st) fail("unknown stage '" + doc.at("stage").dump() + "'");
        s.stage = *st;
    }
    s.timeout_s = number(doc, "timeout_s", s.timeout_s);
    if (!(s.timeout_s > 0.0)) fail("timeout_s must be positive");

    if (doc.contains("port_polygons")) {
        for (const auto& poly : doc.at("port_polygons")) {
            Polygon p;
            for (const auto& v : poly) p.push_back(point(v, "port_polygons[]"));
            if (p.size() < 3) fail("port_polygons[]: need at least 3 vertices");
            s.port_polygons.push_back(std::move(p));
        }
    }
    if (doc.contains("events")) {
        for (const auto& e : doc.at("events")) s.events.push_back(parse_event(e));
        std::stable_sort(s.events.begin(), s.events.end(),
                         [](const ScriptedEvent& a, const ScriptedEvent& b) { return a.time < b.time; });
    }
    if (doc.contains("metrics")) {
        const auto& j = doc.at("metrics");
        expect_keys(j, "metrics", {"nav_accuracy", "collision_distance"});
        s.metrics.nav_accuracy = number(j, "nav_accuracy", s.metrics.nav_accuracy);
        s.metrics.collision_distance = number(j, "collision_distance", s.metrics.collision_distance);
    }

    s.software_version = software_version_of(identity);
    return s;
}

ScenarioSpec load_scenario(const std::filesystem::path& path, LogSink* log) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(path.string() + ": " + e.what());
    }
    ScenarioSpec s = parse_scenario(doc, path.parent_path(), log);
    s.source = path;
    return s;
}

std::string_view to_string(Stage s) {
    switch (s) {
    case Stage::PATH_SIM: return "PATH_SIM";
    case Stage::HIL: return "HIL";
    case Stage::INITIAL_TRIALS: return "INITIAL_TRIALS";
    case Stage::SMALL_CRAFT: return "SMALL_CRAFT";
    case Stage::MEDIUM_SHIP: return "MEDIUM_SHIP";
    case Stage::IMO: return "IMO";
    }
    return "?";
}

std::optional<Stage> parse_stage(std::string_view s) {
    for (Stage st : kAllStages) {
        if (to_string(st) == s) return st;
    }
    return std::nullopt;
}

}  // namespace mass
