#pragma once

// Live-run monitoring and manual-override channel. The simulation loop is the
// only writer; API threads read immutable snapshots and push overrides into a
// bounded queue drained once per step.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mass/simulation.hpp"
#include "mass/status.hpp"

namespace mass {

struct OverrideCommand {
    OverrideRequest::Kind kind = OverrideRequest::Kind::engage;
    ActuatorCommand command;
    std::string operator_id;
    double issued_at_wall = 0.0;  ///< unix seconds, informational
};

/// {"kind": "engage"|"release"|"helm", "operator_id": ..., "thrust", "rudder_deg", "emergency_stop"}.
/// Throws Error{MalformedCommand}.
OverrideCommand parse_override(const nlohmann::json& doc);

struct StreamMessage {
    std::uint64_t seq = 0;
    enum class Kind { snapshot, event } kind = Kind::snapshot;
    std::shared_ptr<const nlohmann::ordered_json> body;

    /// One NDJSON line: {"seq":..,"type":"snapshot"|"event","data":{...}}.
    std::string line() const;
};

class ConsoleHub;

/// One stream consumer. Events are queued in full; snapshots coalesce to the latest.
class Subscription {
public:
    /// Next message in sequence order, or nullopt on timeout.
    /// Throws Error{SubscriberGone} once the hub has closed and everything queued has been read.
    std::optional<StreamMessage> next(std::chrono::milliseconds timeout);
    void close();

private:
    friend class ConsoleHub;
    explicit Subscription(ConsoleHub* hub) : hub_(hub) {}

    ConsoleHub* hub_;
    std::deque<StreamMessage> events_;
    std::uint64_t delivered_ = 0;
    bool closed_ = false;
};

struct HubConfig {
    std::size_t override_capacity = 64;
};

class ConsoleHub {
public:
    explicit ConsoleHub(HubConfig config = {}) : config_(config) {}
    ~ConsoleHub();
    ConsoleHub(const ConsoleHub&) = delete;
    ConsoleHub& operator=(const ConsoleHub&) = delete;

    // Simulation side.
    void attach();
    /// Ends the run: pending override acknowledgements fail and subscribers drain out.
    void detach();
    void publish(const StatusSnapshot& snapshot);
    void publish_event(const Notification& notification);
    std::vector<OverrideRequest> drain(double t);
    /// Hooks wired to this hub.
    SimulationHooks hooks();

    // API side.
    struct Status {
        std::uint64_t seq = 0;
        std::shared_ptr<const nlohmann::ordered_json> body;
    };
    /// Throws Error{NoActiveSimulation}.
    Status status() const;
    /// The future yields the sim time at which the command takes effect.
    /// Throws Error{HelmWithoutOverride | NoActiveSimulation}.
    std::future<double> submit(const OverrideCommand& command);
    std::shared_ptr<Subscription> subscribe();
    bool active() const;

private:
    friend class Subscription;

    struct Pending {
        OverrideRequest request;
        std::vector<std::promise<double>> acks;
    };

    void push_message(StreamMessage::Kind kind, nlohmann::ordered_json body);

    HubConfig config_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    bool active_ = false;
    bool closed_ = false;
    std::uint64_t seq_ = 0;
    std::optional<StreamMessage> latest_;
    std::optional<ControlState> latest_state_;
    std::optional<OverrideRequest::Kind> last_mode_request_;
    std::deque<Pending> overrides_;
    std::vector<std::weak_ptr<Subscription>> subscribers_;
};

}  // namespace mass
