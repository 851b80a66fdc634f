#pragma once

// Dual-controller redundancy: the backup watches the primary's heartbeat and
// vets its actuator orders; on a stall or a dangerous order it cuts primary
// power and steers to the nearest pickup point. Human override preempts both.

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mass/dynamics.hpp"
#include "mass/geo.hpp"
#include "mass/sensors.hpp"

namespace mass {

enum class ControlState { NORMAL, DEGRADED_L1, BACKUP_CONTROL_L2, MANUAL_OVERRIDE };
enum class ActiveController { primary, backup, human };

std::string_view to_string(ControlState s);
std::string_view to_string(ActiveController c);

struct FailoverStatus {
    ControlState state = ControlState::NORMAL;
    bool primary_power = true;
    ActiveController active_controller = ActiveController::primary;
    double last_primary_heartbeat = 0.0;
    std::set<std::string> degraded_components;
    double time = 0.0;
    /// State restored when an override is released.
    ControlState resume_state = ControlState::NORMAL;

    bool invariants_hold() const;
    bool operator==(const FailoverStatus&) const = default;
};

enum class EventKind {
    HeartbeatStall,
    DangerousCommand,
    ComponentFault,
    ComponentRestored,
    PrimaryHealthyConfirmed,
    OverrideEngaged,
    OverrideReleased,
};

inline constexpr EventKind kAllEventKinds[] = {
    EventKind::HeartbeatStall,   EventKind::DangerousCommand,        EventKind::ComponentFault,
    EventKind::ComponentRestored, EventKind::PrimaryHealthyConfirmed, EventKind::OverrideEngaged,
    EventKind::OverrideReleased,
};

std::string_view to_string(EventKind k);
bool is_machine_event(EventKind k);

struct VettingRecord {
    double t_cpa = 0.0;  ///< absolute time of predicted closest approach
    double d_cpa = 0.0;
    std::string obstacle_id;
    ActuatorCommand command;
};

struct FailoverEvent {
    EventKind kind = EventKind::HeartbeatStall;
    double time = 0.0;
    std::string component;                ///< ComponentFault / ComponentRestored
    std::optional<VettingRecord> evidence;  ///< present iff DangerousCommand
};

/// Control-station message emitted on every state change.
struct Notification {
    double time = 0.0;
    ControlState from = ControlState::NORMAL;
    ControlState to = ControlState::NORMAL;
    std::string cause;
};

/// Total transition function; appends a notification when the state changes.
FailoverStatus transition(const FailoverStatus& status, const FailoverEvent& event,
                          std::vector<Notification>* notifications = nullptr);

struct VetResult {
    bool safe = true;
    VettingRecord record;
};

/// Forward-simulates the held command against constant-velocity detections.
/// Unsafe iff the predicted minimum separation drops below safe_distance.
VetResult vet_command(const ActuatorCommand& command, const OwnShipState& own, std::span<const Detection> detections,
                      double safe_distance, double horizon, const HullParams& hull, double vet_dt = 0.1);

struct WatchdogConfig {
    int missed_beats = 3;
    double vet_distance = 25.0;
    double vet_horizon = 10.0;
    double vet_dt = 0.1;
    HullParams hull;
};

struct HeartbeatHistory {
    std::optional<double> last_primary;
};

/// Emits HeartbeatStall when the last beat is older than missed_beats / required_rate,
/// and DangerousCommand (with evidence) when the primary's latest order fails vetting.
std::vector<FailoverEvent> watchdog_evaluate(const HeartbeatHistory& heartbeats,
                                             const std::optional<ActuatorCommand>& latest_primary_command,
                                             const OwnShipState& own, std::span<const Detection> detections,
                                             double required_rate, double t, const WatchdogConfig& config);

/// Nearest pickup point; ties go to the earlier entry. Throws Error{NoPickupPoints}.
Vec2 safe_mode_target(Vec2 position, std::span<const Vec2> pickup_points);

struct BackupConfig {
    double safe_distance = 50.0;
    double speed_fraction = 0.3;
    double rudder_gain = 1.0;  ///< deg rudder per deg heading error
    double rudder_limit_deg = 35.0;
    double arrival_radius = 10.0;
    /// Floor on the speed assumed when predicting closest approach from rest.
    double min_check_speed = 1.0;
};

/// Pure pursuit at reduced thrust. Emergency stop on arrival at the target, and
/// when a detection within 2 * safe_distance would pass closer than safe_distance
/// on the straight run to the target.
ActuatorCommand backup_controller_step(const OwnShipState& own, const NavSolution& nav,
                                       std::span<const Detection> detections, Vec2 target,
                                       const BackupConfig& config);

/// The backup processor. Its software identity is fixed at construction: only a
/// new scenario (the physical upgrade path) can change it.
class BackupController {
public:
    BackupController(std::string software_version, BackupConfig config)
        : version_(std::move(software_version)), config_(config) {}

    const std::string& software_version() const { return version_; }
    const BackupConfig& config() const { return config_; }

    ActuatorCommand command(const OwnShipState& own, const NavSolution& nav, std::span<const Detection> detections,
                            Vec2 target) const {
        return backup_controller_step(own, nav, detections, target, config_);
    }

private:
    const std::string version_;
    const BackupConfig config_;
};

}  // namespace mass
