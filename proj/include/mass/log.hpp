#pragma once

#include <mutex>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace mass {

/// Line-oriented sink for anomaly, alert and control-station records.
class LogSink {
public:
    virtual ~LogSink() = default;
    virtual void write(std::string_view line) = 0;
};

class StreamSink final : public LogSink {
public:
    explicit StreamSink(std::ostream& os) : os_(os) {}
    void write(std::string_view line) override {
        std::lock_guard lock(mu_);
        os_ << line << '\n';
    }

private:
    std::ostream& os_;
    std::mutex mu_;
};

class MemorySink final : public LogSink {
public:
    void write(std::string_view line) override {
        std::lock_guard lock(mu_);
        lines_.emplace_back(line);
    }
    std::vector<std::string> lines() const {
        std::lock_guard lock(mu_);
        return lines_;
    }

private:
    mutable std::mutex mu_;
    std::vector<std::string> lines_;
};

inline void log_line(LogSink* sink, std::string_view line) {
    if (sink) sink->write(line);
}

}  // namespace mass
