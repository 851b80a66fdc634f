#pragma once

// Fixed-step closed-loop run of one scenario: replayed traffic, simulated
// sensors, planning, primary and backup controllers, failover and safety
// bookkeeping.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mass/failover.hpp"
#include "mass/navigation.hpp"
#include "mass/scenario.hpp"
#include "mass/stage.hpp"
#include "mass/status.hpp"

namespace mass {

enum class Outcome { goal_reached, pickup_reached, timeout, collision, error };

std::string_view to_string(Outcome o);
std::optional<Outcome> parse_outcome(std::string_view s);

struct RunResult {
    std::string scenario_id;
    std::string software_version;
    std::string backup_software_version;
    Stage stage = Stage::PATH_SIM;
    std::uint64_t seed = 0;
    Outcome outcome = Outcome::timeout;

    double miles = 0.0;
    double duration = 0.0;
    std::uint64_t total_steps = 0;
    std::uint64_t nav_error_steps = 0;
    double critical_downtime = 0.0;
    std::uint64_t port_operations = 0;

    double min_separation = 0.0;  ///< infinity when no traffic
    std::vector<SafetyViolation> violations;
    std::uint64_t collisions = 0;

    std::vector<Notification> failover_events;
    std::uint64_t level1_events = 0;
    std::uint64_t level2_events = 0;
    std::uint64_t nav_alerts = 0;
    ControlState final_state = ControlState::NORMAL;
    ActiveController final_controller = ActiveController::primary;
    std::uint64_t replans = 0;

    /// Any violation or an outcome other than goal/pickup arrival.
    bool failed() const;
    bool had_failover_event() const { return level1_events + level2_events > 0; }
};

nlohmann::ordered_json to_json(const RunResult& r);
/// Throws Error{LedgerCorrupt} on a malformed record.
RunResult run_result_from_json(const nlohmann::json& j);

struct OverrideRequest {
    enum class Kind { engage, release, helm };
    Kind kind = Kind::engage;
    ActuatorCommand command;
    std::string operator_id;
};

struct SimulationHooks {
    /// Called after every step with a complete snapshot.
    std::function<void(const StatusSnapshot&)> on_step;
    std::function<void(const Notification&)> on_transition;
    /// Drained once per step boundary; `t` is the sim time the requests take effect.
    std::function<std::vector<OverrideRequest>(double t)> drain_overrides;
    /// Called between steps; used to pace a live run against the wall clock.
    std::function<void(double t)> pace;
    /// Polled between steps; true ends the run with outcome timeout.
    std::function<bool()> should_stop;
};

/// Throws Error{InfeasibleBudget | ZeroRelativeSpeed} from the timing budget
/// and Error{NoPickupPoints} if a Level-2 event happens without pickup points.
RunResult run_scenario(const ScenarioSpec& spec, const SimulationHooks& hooks = {});

struct CapacityCheck {
    std::uint64_t max_recorded_obstacles = 0;
    std::uint64_t required = 0;
};

/// Peak number of replayed tracks live at one instant, scaled by the budget's safety factor.
CapacityCheck capacity_check(const ScenarioSpec& spec);

}  // namespace mass
