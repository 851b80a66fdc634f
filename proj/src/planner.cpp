#include "mass/planner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

#include "mass/error.hpp"

namespace mass {

namespace {

// Keeps planned edges strictly clear of the checker's `<` comparison under round-off.
double required_clearance(double safe) { return safe * (1.0 + 1e-9) + 1e-6; }

struct IndexedObstacle {
    const ObstacleTrack* track;
    double max_speed;
};

std::vector<IndexedObstacle> index_obstacles(std::span<const ObstacleTrack> tracks) {
    std::vector<IndexedObstacle> out;
    out.reserve(tracks.size());
    for (const auto& tr : tracks) {
        double vmax = 0.0;
        for (std::size_t i = 1; i < tr.samples.size(); ++i) {
            const auto& a = tr.samples[i - 1];
            const auto& b = tr.samples[i];
            vmax = std::max(vmax, distance(a.position, b.position) / (b.time - a.time));
        }
        out.push_back({&tr, vmax});
    }
    return out;
}

/// Minimum separation between linear own motion (pa at ta -> pb at tb) and a track.
double min_separation(Vec2 pa, double ta, Vec2 pb, double tb, const ObstacleTrack& track) {
    const double span = tb - ta;
    const Vec2 v_own = span > 0.0 ? (pb - pa) / span : Vec2{};
    auto own_at = [&](double t) { return pa + v_own * (t - ta); };

    double best = std::numeric_limits<double>::infinity();
    double t_prev = ta;
    Vec2 r_prev = own_at(ta) - sample_track(track, ta).position;
    auto piece = [&](double t_next) {
        const Vec2 r_next = own_at(t_next) - sample_track(track, t_next).position;
        const double dt = t_next - t_prev;
        const auto [tau, d] = cpa_linear(r_prev, dt > 0.0 ? (r_next - r_prev) / dt : Vec2{}, dt);
        (void)tau;
        best = std::min(best, d);
        t_prev = t_next;
        r_prev = r_next;
    };
    const auto& s = track.samples;
    auto it = std::upper_bound(s.begin(), s.end(), ta, [](double t, const VesselState& v) { return t < v.time; });
    for (; it != s.end() && it->time < tb; ++it) piece(it->time);
    piece(tb);
    return best;
}

bool leg_is_clear(Vec2 pa, double ta, Vec2 pb, double tb, std::span<const IndexedObstacle> obstacles,
                  double clearance) {
    const double span = tb - ta;
    const double v_own = span > 0.0 ? distance(pa, pb) / span : 0.0;
    for (const auto& o : obstacles) {
        const double d0 = distance(pa, sample_track(*o.track, ta).position);
        // Neither vessel can close the gap faster than their combined top speeds.
        if (d0 - (v_own + o.max_speed) * span >= clearance) continue;
        if (min_separation(pa, ta, pb, tb, *o.track) < clearance) return false;
    }
    return true;
}

bool finite(Vec2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

Bounds resolve_bounds(Vec2 start, Vec2 goal, const PlannerConfig& c) {
    if (c.bounds) return *c.bounds;
    return Bounds{{std::min(start.x, goal.x) - c.bounds_margin, std::min(start.y, goal.y) - c.bounds_margin},
                  {std::max(start.x, goal.x) + c.bounds_margin, std::max(start.y, goal.y) + c.bounds_margin}};
}

void validate_endpoints(Vec2 start, Vec2 goal, const Bounds& b) {
    if (!finite(start) || !finite(goal)) throw Error(Errc::InvalidEndpoints, "non-finite endpoint");
    if (!b.contains(start) || !b.contains(goal)) throw Error(Errc::InvalidEndpoints, "endpoint outside scenario bounds");
}

}  // namespace

double TimeExpandedAStar::time_step(const PlannerConfig& c) const {
    const double cell = c.effective_cell();
    // Diagonal moves must stay within v_max.
    return std::max(cell / c.cruise_speed, std::sqrt(2.0) * cell / c.v_max);
}

PlannedPath TimeExpandedAStar::plan(Vec2 start, Vec2 goal, double t0, std::span<const ObstacleTrack> tracks,
                                    const PlannerConfig& c) const {
    const Bounds bounds = resolve_bounds(start, goal, c);
    validate_endpoints(start, goal, bounds);

    if (start == goal) {
        const std::pair<double, Vec2> knot{t0, start};
        return PlannedPath::from_knots(std::span(&knot, 1));
    }

    const double cell = c.effective_cell();
    const double tau = time_step(c);
    const double clearance = required_clearance(c.safe_distance);
    const auto obstacles = index_obstacles(tracks);

    const double direct_end = t0 + distance(start, goal) / c.cruise_speed;
    if (leg_is_clear(start, t0, goal, direct_end, obstacles, clearance)) {
        const std::pair<double, Vec2> knots[2] = {{t0, start}, {direct_end, goal}};
        return PlannedPath::from_knots(knots);
    }

    const int imin = static_cast<int>(std::ceil((bounds.min.x - start.x) / cell));
    const int imax = static_cast<int>(std::floor((bounds.max.x - start.x) / cell));
    const int jmin = static_cast<int>(std::ceil((bounds.min.y - start.y) / cell));
    const int jmax = static_cast<int>(std::floor((bounds.max.y - start.y) / cell));
    if (imax - imin >= (1 << 20) || jmax - jmin >= (1 << 20)) throw Error(Errc::NoPathFound, "grid too large");

    const double straight_time = distance(start, goal) / c.cruise_speed;
    const double horizon = c.max_duration > 0.0 ? c.max_duration : 4.0 * straight_time + 300.0;
    const int kmax = std::min(static_cast<int>(std::ceil(horizon / tau)), (1 << 23) - 1);

    const int gi = std::clamp(static_cast<int>(std::lround((goal.x - start.x) / cell)), imin, imax);
    const int gj = std::clamp(static_cast<int>(std::lround((goal.y - start.y) / cell)), jmin, jmax);

    auto center = [&](int i, int j) { return start + Vec2{i * cell, j * cell}; };
    auto key = [&](int i, int j, int k) {
        return (static_cast<std::uint64_t>(i - imin) << 44) | (static_cast<std::uint64_t>(j - jmin) << 24) |
               static_cast<std::uint64_t>(k);
    };
    auto unpack = [&](std::uint64_t kk) {
        return std::array<int, 3>{static_cast<int>(kk >> 44) + imin, static_cast<int>((kk >> 24) & 0xFFFFF) + jmin,
                                  static_cast<int>(kk & 0xFFFFFF)};
    };
    auto heuristic = [&](int i, int j) {
        const double dx = std::abs(i - gi);
        const double dy = std::abs(j - gj);
        return tau * (std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy));
    };

    struct Node {
        double g;
        std::uint64_t parent;
        bool closed;
    };
    struct Open {
        double f;
        double g;
        std::uint64_t seq;
        std::uint64_t key;
        bool operator<(const Open& o) const {
            if (f != o.f) return f > o.f;
            if (g != o.g) return g < o.g;
            return seq > o.seq;
        }
    };

    std::unordered_map<std::uint64_t, Node> nodes;
    std::priority_queue<Open> open;
    std::uint64_t seq = 0;
    const std::uint64_t root = key(0, 0, 0);
    nodes[root] = {0.0, root, false};
    open.push({heuristic(0, 0), 0.0, seq++, root});

    static constexpr int kMoves[9][2] = {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

    std::size_t expansions = 0;
    while (!open.empty()) {
        const Open top = open.top();
        open.pop();
        auto& node = nodes[top.key];
        if (node.closed) continue;
        node.closed = true;
        if (++expansions > c.max_expansions) break;

        const auto [i, j, k] = unpack(top.key);
        const double t = t0 + k * tau;
        const Vec2 p = center(i, j);

        if (i == gi && j == gj) {
            const double leg = distance(p, goal);
            const double t_end = t + leg / c.cruise_speed;
            if (leg == 0.0 || leg_is_clear(p, t, goal, t_end, obstacles, clearance)) {
                std::vector<std::array<int, 3>> cells;
                for (std::uint64_t cur = top.key;; cur = nodes[cur].parent) {
                    cells.push_back(unpack(cur));
                    if (cur == root) break;
                }
                std::reverse(cells.begin(), cells.end());
                std::vector<std::pair<double, Vec2>> knots;
                for (std::size_t n = 0; n < cells.size(); ++n) {
                    // Drop interior knots where the move repeats the previous one.
                    if (n > 0 && n + 1 < cells.size()) {
                        const auto& a = cells[n - 1];
                        const auto& b = cells[n];
                        const auto& d = cells[n + 1];
                        if (b[0] - a[0] == d[0] - b[0] && b[1] - a[1] == d[1] - b[1]) continue;
                    }
                    knots.emplace_back(t0 + cells[n][2] * tau, center(cells[n][0], cells[n][1]));
                }
                if (leg > 0.0 && knots.size() >= 2) {
                    // Move the goal-cell knot onto the goal itself rather than adding a sideways jog.
                    const auto [tp, pp] = knots[knots.size() - 2];
                    const double arrive = std::max(knots.back().first, tp + distance(pp, goal) / c.v_max);
                    if (leg_is_clear(pp, tp, goal, arrive, obstacles, clearance)) {
                        knots.back() = {arrive, goal};
                        return PlannedPath::from_knots(knots);
                    }
                }
                if (leg > 0.0) knots.emplace_back(t_end, goal);
                return PlannedPath::from_knots(knots);
            }
        }
        if (k >= kmax) continue;

        for (const auto& m : kMoves) {
            const int ni = i + m[0];
            const int nj = j + m[1];
            if (ni < imin || ni > imax || nj < jmin || nj > jmax) continue;
            const std::uint64_t nk = key(ni, nj, k + 1);
            const double cost = (m[0] != 0 && m[1] != 0) ? std::sqrt(2.0) * tau : tau;
            const double g = top.g + cost;
            auto found = nodes.find(nk);
            if (found != nodes.end() && (found->second.closed || found->second.g <= g)) continue;
            if (!leg_is_clear(p, t, center(ni, nj), t + tau, obstacles, clearance)) continue;
            nodes[nk] = {g, top.key, false};
            open.push({g + heuristic(ni, nj), g, seq++, nk});
        }
    }
    throw Error(Errc::NoPathFound, "no safe path within " + std::to_string(horizon) + " s");
}

double StraightLinePlanner::time_step(const PlannerConfig& c) const { return c.effective_cell() / c.cruise_speed; }

PlannedPath StraightLinePlanner::plan(Vec2 start, Vec2 goal, double t0, std::span<const ObstacleTrack>,
                                      const PlannerConfig& c) const {
    validate_endpoints(start, goal, resolve_bounds(start, goal, c));
    std::vector<std::pair<double, Vec2>> knots{{t0, start}};
    if (!(start == goal)) knots.emplace_back(t0 + distance(start, goal) / c.cruise_speed, goal);
    return PlannedPath::from_knots(knots);
}

PlannerRegistry::PlannerRegistry() {
    add("time_astar", [] { return std::make_unique<TimeExpandedAStar>(); });
    add("straight_line", [] { return std::make_unique<StraightLinePlanner>(); });
}

PlannerRegistry& PlannerRegistry::instance() {
    static PlannerRegistry registry;
    return registry;
}

void PlannerRegistry::add(std::string name, Factory factory) { factories_[std::move(name)] = std::move(factory); }

std::unique_ptr<PathPlanner> PlannerRegistry::create(std::string_view name) const {
    const auto it = factories_.find(name);
    if (it == factories_.end()) throw Error(Errc::UnknownPlanner, std::string(name));
    return it->second();
}

std::vector<std::string> PlannerRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, f] : factories_) out.push_back(name);
    return out;
}

PlannedPath plan_path(Vec2 start, Vec2 goal, double t0, std::span<const ObstacleTrack> tracks,
                      const PlannerConfig& config, std::string_view planner) {
    const auto impl = PlannerRegistry::instance().create(planner);
    PlannedPath path = impl->plan(start, goal, t0, tracks, config);
    const auto violations = check_path_safety(path, tracks, config.safe_distance, impl->time_step(config));
    if (!violations.empty()) {
        throw Error(Errc::NoPathFound, std::string(planner) + " produced a path with " +
                                           std::to_string(violations.size()) + " safety violation(s)");
    }
    return path;
}

}  // namespace mass
