#include "mass/failover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mass/error.hpp"
#include "mass/navigation.hpp"

namespace mass {

std::string_view to_string(ControlState s) {
    switch (s) {
    case ControlState::NORMAL: return "NORMAL";
    case ControlState::DEGRADED_L1: return "DEGRADED_L1";
    case ControlState::BACKUP_CONTROL_L2: return "BACKUP_CONTROL_L2";
    case ControlState::MANUAL_OVERRIDE: return "MANUAL_OVERRIDE";
    }
    return "?";
}

std::string_view to_string(ActiveController c) {
    switch (c) {
    case ActiveController::primary: return "primary";
    case ActiveController::backup: return "backup";
    case ActiveController::human: return "human";
    }
    return "?";
}

std::string_view to_string(EventKind k) {
    switch (k) {
    case EventKind::HeartbeatStall: return "HeartbeatStall";
    case EventKind::DangerousCommand: return "DangerousCommand";
    case EventKind::ComponentFault: return "ComponentFault";
    case EventKind::ComponentRestored: return "ComponentRestored";
    case EventKind::PrimaryHealthyConfirmed: return "PrimaryHealthyConfirmed";
    case EventKind::OverrideEngaged: return "OverrideEngaged";
    case EventKind::OverrideReleased: return "OverrideReleased";
    }
    return "?";
}

bool is_machine_event(EventKind k) { return k != EventKind::OverrideEngaged && k != EventKind::OverrideReleased; }

bool FailoverStatus::invariants_hold() const {
    switch (state) {
    case ControlState::NORMAL:
        return active_controller == ActiveController::primary && primary_power;
    case ControlState::DEGRADED_L1:
        return active_controller == ActiveController::primary && primary_power && !degraded_components.empty();
    case ControlState::BACKUP_CONTROL_L2:
        return active_controller == ActiveController::backup && !primary_power;
    case ControlState::MANUAL_OVERRIDE:
        return active_controller == ActiveController::human;
    }
    return false;
}

namespace {

void to_primary(FailoverStatus& s) {
    s.primary_power = true;
    s.active_controller = ActiveController::primary;
    s.state = s.degraded_components.empty() ? ControlState::NORMAL : ControlState::DEGRADED_L1;
}

void to_backup(FailoverStatus& s) {
    s.primary_power = false;
    s.active_controller = ActiveController::backup;
    s.state = ControlState::BACKUP_CONTROL_L2;
}

std::string cause_of(const FailoverEvent& e) {
    std::string c(to_string(e.kind));
    if (!e.component.empty()) c += "(" + e.component + ")";
    return c;
}

}  // namespace

FailoverStatus transition(const FailoverStatus& status, const FailoverEvent& event,
                          std::vector<Notification>* notifications) {
    FailoverStatus s = status;
    s.time = std::max(status.time, event.time);

    switch (event.kind) {
    case EventKind::ComponentFault:
        if (!event.component.empty()) s.degraded_components.insert(event.component);
        if (s.state == ControlState::NORMAL && !s.degraded_components.empty()) s.state = ControlState::DEGRADED_L1;
        break;
    case EventKind::ComponentRestored:
        s.degraded_components.erase(event.component);
        if (s.state == ControlState::DEGRADED_L1 && s.degraded_components.empty()) s.state = ControlState::NORMAL;
        break;
    case EventKind::HeartbeatStall:
    case EventKind::DangerousCommand:
        if (s.state == ControlState::NORMAL || s.state == ControlState::DEGRADED_L1) to_backup(s);
        break;
    case EventKind::PrimaryHealthyConfirmed:
        if (s.state == ControlState::BACKUP_CONTROL_L2) to_primary(s);
        break;
    case EventKind::OverrideEngaged:
        if (s.state != ControlState::MANUAL_OVERRIDE) {
            s.resume_state = s.state;
            s.state = ControlState::MANUAL_OVERRIDE;
            s.active_controller = ActiveController::human;
        }
        break;
    case EventKind::OverrideReleased:
        if (s.state == ControlState::MANUAL_OVERRIDE) {
            // A primary that had been cut off stays cut off until it proves healthy.
            if (s.resume_state == ControlState::BACKUP_CONTROL_L2) {
                to_backup(s);
            } else {
                to_primary(s);
            }
            s.resume_state = ControlState::NORMAL;
        }
        break;
    }

    if (notifications && s.state != status.state) {
        notifications->push_back({s.time, status.state, s.state, cause_of(event)});
    }
    return s;
}

VetResult vet_command(const ActuatorCommand& command, const OwnShipState& own, std::span<const Detection> detections,
                      double safe_distance, double horizon, const HullParams& hull, double vet_dt) {
    VetResult out;
    out.record.command = command;
    out.record.t_cpa = own.time;
    out.record.d_cpa = std::numeric_limits<double>::infinity();
    if (detections.empty()) return out;

    auto observe = [&](const OwnShipState& s, double elapsed) {
        for (const auto& d : detections) {
            const Vec2 p = d.position + d.velocity.value_or(Vec2{}) * elapsed;
            const double dist = distance(s.position, p);
            if (dist < out.record.d_cpa) {
                out.record.d_cpa = dist;
                out.record.t_cpa = own.time + elapsed;
                out.record.obstacle_id = d.obstacle_id;
            }
        }
    };

    OwnShipState s = own;
    observe(s, 0.0);
    const auto steps = static_cast<long>(std::ceil(horizon / vet_dt - 1e-9));
    for (long i = 1; i <= steps; ++i) {
        const double elapsed = std::min(horizon, i * vet_dt);
        s = step(s, command, elapsed - (i - 1) * vet_dt, hull);
        observe(s, elapsed);
    }
    out.safe = !(out.record.d_cpa < safe_distance);
    return out;
}

std::vector<FailoverEvent> watchdog_evaluate(const HeartbeatHistory& heartbeats,
                                             const std::optional<ActuatorCommand>& latest_primary_command,
                                             const OwnShipState& own, std::span<const Detection> detections,
                                             double required_rate, double t, const WatchdogConfig& config) {
    std::vector<FailoverEvent> events;
    const double limit = config.missed_beats / required_rate;
    const double since = heartbeats.last_primary ? t - *heartbeats.last_primary : std::numeric_limits<double>::infinity();
    // The epsilon keeps exactly-on-schedule beats from tripping on round-off in t.
    if (since > limit * (1.0 + 1e-9)) events.push_back({EventKind::HeartbeatStall, t, {}, std::nullopt});

    if (latest_primary_command) {
        const VetResult v = vet_command(*latest_primary_command, own, detections, config.vet_distance,
                                        config.vet_horizon, config.hull, config.vet_dt);
        if (!v.safe) events.push_back({EventKind::DangerousCommand, t, {}, v.record});
    }
    return events;
}

Vec2 safe_mode_target(Vec2 position, std::span<const Vec2> pickup_points) {
    if (pickup_points.empty()) throw Error(Errc::NoPickupPoints, "scenario defines no pickup points");
    const auto it = std::min_element(pickup_points.begin(), pickup_points.end(), [&](Vec2 a, Vec2 b) {
        return distance(position, a) < distance(position, b);
    });
    return *it;
}

ActuatorCommand backup_controller_step(const OwnShipState& own, const NavSolution& nav,
                                       std::span<const Detection> detections, Vec2 target,
                                       const BackupConfig& config) {
    ActuatorCommand cmd;
    const Vec2 to_target = target - nav.position;
    const double remaining = to_target.norm();
    if (remaining <= config.arrival_radius) {
        // Hold station at the pickup point.
        cmd.emergency_stop = true;
        return cmd;
    }
    const double speed = std::max(own.speed, config.min_check_speed);
    const Vec2 own_velocity = heading_vector(bearing_deg(to_target)) * speed;
    for (const auto& d : detections) {
        if (d.range > 2.0 * config.safe_distance) continue;
        const Vec2 rel = d.position - nav.position;
        const Vec2 rel_velocity = d.velocity.value_or(Vec2{}) - own_velocity;
        const auto [tau, d_cpa] = cpa_linear(rel, rel_velocity, remaining / speed);
        if (rel.norm() < config.safe_distance || d_cpa < config.safe_distance) {
            cmd.emergency_stop = true;
            return cmd;
        }
    }
    const double error = wrap180(bearing_deg(to_target) - own.heading_deg);
    cmd.rudder_deg = std::clamp(config.rudder_gain * error, -config.rudder_limit_deg, config.rudder_limit_deg);
    cmd.thrust = config.speed_fraction;
    return cmd;
}

}  // namespace mass
