#include "mass/tracks.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace mass {

std::vector<ObstacleTrack> build_tracks(std::span<const ais::AisMessage> messages, const LocalFrame& frame,
                                        const TrackBuildOptions& options, LogSink* log) {
    std::map<std::uint32_t, std::vector<VesselState>> by_mmsi;
    std::map<std::uint32_t, ais::StaticInfo> statics;

    for (const auto& m : messages) {
        if (m.message_type == 5 && m.static_info) {
            statics[m.mmsi] = *m.static_info;
            continue;
        }
        if (!m.is_position_report() || !m.timestamp || !m.position) continue;
        VesselState s;
        s.time = *m.timestamp;
        s.position = frame.to_local(*m.position);
        s.speed = m.sog_mps.value_or(0.0);
        s.heading_deg = m.cog_deg ? *m.cog_deg : (m.heading_deg ? *m.heading_deg : 0.0);
        by_mmsi[m.mmsi].push_back(s);
    }

    std::vector<ObstacleTrack> tracks;
    for (auto& [mmsi, samples] : by_mmsi) {
        std::stable_sort(samples.begin(), samples.end(),
                         [](const VesselState& a, const VesselState& b) { return a.time < b.time; });
        std::vector<VesselState> unique;
        for (const auto& s : samples) {
            if (!unique.empty() && unique.back().time == s.time) {
                unique.back() = s;
            } else {
                unique.push_back(s);
            }
        }

        std::vector<std::vector<VesselState>> segments(1);
        for (const auto& s : unique) {
            auto& seg = segments.back();
            if (!seg.empty()) {
                const auto& prev = seg.back();
                const double implied = distance(prev.position, s.position) / (s.time - prev.time);
                if (implied > options.max_implied_speed_mps) {
                    std::ostringstream os;
                    os << "track split: mmsi " << mmsi << " t=" << prev.time << "->" << s.time
                       << " implied speed " << implied << " m/s > " << options.max_implied_speed_mps;
                    log_line(log, os.str());
                    segments.emplace_back();
                }
            }
            segments.back().push_back(s);
        }

        const auto info = statics.find(mmsi);
        for (std::size_t i = 0; i < segments.size(); ++i) {
            if (segments[i].empty()) continue;
            ObstacleTrack t;
            t.mmsi = mmsi;
            t.id = std::to_string(mmsi) + (i == 0 ? "" : "#" + std::to_string(i + 1));
            t.samples = std::move(segments[i]);
            if (info != statics.end()) {
                t.length_m = info->second.length_m;
                t.beam_m = info->second.beam_m;
            }
            tracks.push_back(std::move(t));
        }
    }
    return tracks;
}

VesselState sample_track(const ObstacleTrack& track, double t) {
    const auto& s = track.samples;
    if (s.empty()) return VesselState{t, {}, 0.0, 0.0};

    auto held = [t](const VesselState& b) { return VesselState{t, b.position, 0.0, b.heading_deg}; };
    if (t < s.front().time) return held(s.front());
    if (t > s.back().time) return held(s.back());

    const auto it = std::lower_bound(s.begin(), s.end(), t,
                                     [](const VesselState& v, double time) { return v.time < time; });
    if (it->time == t) return *it;

    const auto& b = *it;
    const auto& a = *(it - 1);
    const double f = (t - a.time) / (b.time - a.time);
    const Vec2 d = b.position - a.position;
    VesselState out;
    out.time = t;
    out.position = lerp(a.position, b.position, f);
    out.speed = d.norm() / (b.time - a.time);
    out.heading_deg = d.norm() > 0.0 ? bearing_deg(d) : a.heading_deg;
    return out;
}

}  // namespace mass
