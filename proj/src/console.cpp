#include "mass/console.hpp"

#include <algorithm>
#include <cmath>

#include "mass/error.hpp"

namespace mass {

using nlohmann::json;
using nlohmann::ordered_json;

OverrideCommand parse_override(const json& doc) {
    auto fail = [](const std::string& what) -> OverrideCommand { throw Error(Errc::MalformedCommand, what); };
    if (!doc.is_object() || !doc.contains("kind") || !doc.at("kind").is_string()) return fail("missing 'kind'");
    OverrideCommand c;
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "engage") {
        c.kind = OverrideRequest::Kind::engage;
    } else if (kind == "release") {
        c.kind = OverrideRequest::Kind::release;
    } else if (kind == "helm") {
        c.kind = OverrideRequest::Kind::helm;
    } else {
        return fail("unknown kind '" + kind + "'");
    }
    for (const auto& [key, v] : doc.items()) {
        if (key == "kind") continue;
        if (key == "operator_id" && v.is_string()) {
            c.operator_id = v.get<std::string>();
        } else if (key == "issued_at" && v.is_number()) {
            c.issued_at_wall = v.get<double>();
        } else if ((key == "thrust" || key == "rudder_deg") && v.is_number() && c.kind == OverrideRequest::Kind::helm) {
            const double x = v.get<double>();
            if (!std::isfinite(x)) return fail(key + " must be finite");
            (key == "thrust" ? c.command.thrust : c.command.rudder_deg) = x;
        } else if (key == "emergency_stop" && v.is_boolean() && c.kind == OverrideRequest::Kind::helm) {
            c.command.emergency_stop = v.get<bool>();
        } else {
            return fail("unexpected field '" + key + "'");
        }
    }
    if (c.kind == OverrideRequest::Kind::helm && !(c.command.thrust >= 0.0 && c.command.thrust <= 1.0)) {
        return fail("thrust must lie in [0, 1]");
    }
    return c;
}

std::string StreamMessage::line() const {
    ordered_json j;
    j["seq"] = seq;
    j["type"] = kind == Kind::snapshot ? "snapshot" : "event";
    j["data"] = body ? *body : ordered_json();
    return j.dump() + "\n";
}

std::optional<StreamMessage> Subscription::next(std::chrono::milliseconds timeout) {
    std::unique_lock lock(hub_->mu_);
    auto ready = [&]() -> std::optional<StreamMessage> {
        const bool fresh_snapshot = hub_->latest_ && hub_->latest_->seq > delivered_;
        if (!events_.empty() && (!fresh_snapshot || events_.front().seq < hub_->latest_->seq)) {
            StreamMessage m = std::move(events_.front());
            events_.pop_front();
            delivered_ = std::max(delivered_, m.seq);
            return m;
        }
        if (fresh_snapshot) {
            delivered_ = hub_->latest_->seq;
            return *hub_->latest_;
        }
        return std::nullopt;
    };
    if (auto m = ready()) return m;
    if (closed_ || hub_->closed_) throw Error(Errc::SubscriberGone, "stream ended");
    hub_->cv_.wait_for(lock, timeout, [&] {
        return closed_ || hub_->closed_ || !events_.empty() || (hub_->latest_ && hub_->latest_->seq > delivered_);
    });
    if (auto m = ready()) return m;
    if (closed_ || hub_->closed_) throw Error(Errc::SubscriberGone, "stream ended");
    return std::nullopt;
}

void Subscription::close() {
    std::lock_guard lock(hub_->mu_);
    closed_ = true;
    hub_->cv_.notify_all();
}

ConsoleHub::~ConsoleHub() { detach(); }

void ConsoleHub::attach() {
    std::lock_guard lock(mu_);
    active_ = true;
    closed_ = false;
    latest_.reset();
    latest_state_.reset();
    last_mode_request_.reset();
}

void ConsoleHub::detach() {
    std::lock_guard lock(mu_);
    if (!active_ && closed_) return;
    active_ = false;
    closed_ = true;
    for (auto& p : overrides_) {
        for (auto& a : p.acks) {
            a.set_exception(std::make_exception_ptr(Error(Errc::NoActiveSimulation, "run ended")));
        }
    }
    overrides_.clear();
    cv_.notify_all();
}

void ConsoleHub::push_message(StreamMessage::Kind kind, ordered_json body) {
    StreamMessage m{++seq_, kind, std::make_shared<const ordered_json>(std::move(body))};
    if (kind == StreamMessage::Kind::snapshot) {
        latest_ = std::move(m);
    } else {
        std::erase_if(subscribers_, [](const auto& w) { return w.expired(); });
        for (const auto& w : subscribers_) {
            if (auto s = w.lock(); s && !s->closed_) s->events_.push_back(m);
        }
    }
    cv_.notify_all();
}

void ConsoleHub::publish(const StatusSnapshot& snapshot) {
    ordered_json body = to_json(snapshot);
    std::lock_guard lock(mu_);
    latest_state_ = snapshot.failover.state;
    push_message(StreamMessage::Kind::snapshot, std::move(body));
}

void ConsoleHub::publish_event(const Notification& n) {
    ordered_json body = to_json(n);
    std::lock_guard lock(mu_);
    push_message(StreamMessage::Kind::event, std::move(body));
}

std::vector<OverrideRequest> ConsoleHub::drain(double t) {
    std::deque<Pending> taken;
    {
        std::lock_guard lock(mu_);
        taken.swap(overrides_);
    }
    std::vector<OverrideRequest> out;
    for (auto& p : taken) {
        out.push_back(std::move(p.request));
        for (auto& a : p.acks) a.set_value(t);
    }
    return out;
}

SimulationHooks ConsoleHub::hooks() {
    SimulationHooks h;
    h.on_step = [this](const StatusSnapshot& s) { publish(s); };
    h.on_transition = [this](const Notification& n) { publish_event(n); };
    h.drain_overrides = [this](double t) { return drain(t); };
    return h;
}

ConsoleHub::Status ConsoleHub::status() const {
    std::lock_guard lock(mu_);
    if (!active_ || !latest_) throw Error(Errc::NoActiveSimulation, "no simulation is attached");
    return {latest_->seq, latest_->body};
}

bool ConsoleHub::active() const {
    std::lock_guard lock(mu_);
    return active_;
}

std::future<double> ConsoleHub::submit(const OverrideCommand& command) {
    std::lock_guard lock(mu_);
    if (!active_) throw Error(Errc::NoActiveSimulation, "no simulation is attached");
    using Kind = OverrideRequest::Kind;
    if (command.kind == Kind::helm) {
        const bool engaged = last_mode_request_ ? *last_mode_request_ == Kind::engage
                                                : latest_state_ == ControlState::MANUAL_OVERRIDE;
        if (!engaged) throw Error(Errc::HelmWithoutOverride, "helm requires an engaged override");
    } else {
        last_mode_request_ = command.kind;
    }

    std::promise<double> ack;
    std::future<double> fut = ack.get_future();
    OverrideRequest req{command.kind, command.command, command.operator_id};
    // A full queue coalesces helm orders into the newest one; engage and release always go in.
    if (command.kind == Kind::helm && overrides_.size() >= config_.override_capacity) {
        const auto it = std::find_if(overrides_.rbegin(), overrides_.rend(),
                                     [](const Pending& p) { return p.request.kind == Kind::helm; });
        if (it != overrides_.rend() && it == overrides_.rbegin()) {
            it->request = std::move(req);
            it->acks.push_back(std::move(ack));
            return fut;
        }
    }
    Pending p{std::move(req), {}};
    p.acks.push_back(std::move(ack));
    overrides_.push_back(std::move(p));
    return fut;
}

std::shared_ptr<Subscription> ConsoleHub::subscribe() {
    std::lock_guard lock(mu_);
    std::shared_ptr<Subscription> s(new Subscription(this));
    subscribers_.push_back(s);
    return s;
}

}  // namespace mass
