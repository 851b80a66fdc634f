#pragma once

#include <cmath>
#include <numbers>

namespace mass {

inline constexpr double kMetersPerNauticalMile = 1852.0;
inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kKnotToMps = kMetersPerNauticalMile / kSecondsPerHour;
inline constexpr double kEarthRadiusM = 6371000.0;

constexpr double meters_to_nmi(double m) { return m / kMetersPerNauticalMile; }
constexpr double nmi_to_meters(double nmi) { return nmi * kMetersPerNauticalMile; }

constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Planar vector in the local tangent frame: x east, y north, meters.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr bool operator==(const Vec2&) const = default;

    constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

constexpr Vec2 lerp(Vec2 a, Vec2 b, double f) { return a + (b - a) * f; }

/// Wraps to [0, 360).
inline double wrap360(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    return w >= 360.0 ? 0.0 : w;
}

/// Wraps to (-180, 180].
inline double wrap180(double deg) {
    double w = wrap360(deg);
    return w > 180.0 ? w - 360.0 : w;
}

/// Unit vector along a true heading (0 = north, 90 = east).
inline Vec2 heading_vector(double heading_deg) {
    const double r = deg2rad(heading_deg);
    return {std::sin(r), std::cos(r)};
}

/// True bearing of a displacement, degrees in [0, 360).
inline double bearing_deg(Vec2 d) { return wrap360(rad2deg(std::atan2(d.x, d.y))); }

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

/// Equirectangular projection about a scenario origin. Port-scale only.
class LocalFrame {
public:
    LocalFrame() = default;
    explicit LocalFrame(LatLon origin)
        : origin_(origin), cos_lat_(std::cos(deg2rad(origin.lat))) {}

    Vec2 to_local(LatLon p) const {
        return {kEarthRadiusM * deg2rad(p.lon - origin_.lon) * cos_lat_,
                kEarthRadiusM * deg2rad(p.lat - origin_.lat)};
    }

    LatLon to_geo(Vec2 p) const {
        return {origin_.lat + rad2deg(p.y / kEarthRadiusM),
                origin_.lon + rad2deg(p.x / (kEarthRadiusM * cos_lat_))};
    }

    LatLon origin() const { return origin_; }

private:
    LatLon origin_{};
    double cos_lat_ = 1.0;
};

struct TimeWindow {
    double start = 0.0;
    double end = 0.0;

    bool contains(double t) const { return t >= start && t < end; }
};

}  // namespace mass
