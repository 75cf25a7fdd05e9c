#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <variant>

namespace degctrl {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// z-component of the cross product; positive for a CCW turn.
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

/// Symmetric 2x2 matrix, stored as (a11, a12, a22).
struct SymMat2 {
    double a11 = 1.0;
    double a12 = 0.0;
    double a22 = 1.0;

    Vec2 apply(const Vec2& v) const {
        return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y};
    }
    double quad(const Vec2& v) const { return v.dot(apply(v)); }
    double min_eigenvalue() const {
        const double tr = a11 + a22;
        const double det = a11 * a22 - a12 * a12;
        return 0.5 * (tr - std::sqrt(std::max(tr * tr - 4.0 * det, 0.0)));
    }
    static SymMat2 identity() { return {1.0, 0.0, 1.0}; }
};

/// Axis-aligned rectangle (x0,x1) x (y0,y1).
struct RectDomain {
    double x0, x1, y0, y1;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
};

/// Disk of radius r centered at c.
struct DiskDomain {
    Vec2 center;
    double radius;
};

using Domain = std::variant<RectDomain, DiskDomain>;

inline double domain_area(const Domain& d) {
    if (const auto* r = std::get_if<RectDomain>(&d)) return r->area();
    const auto& c = std::get<DiskDomain>(d);
    return M_PI * c.radius * c.radius;
}

/// Largest axis-aligned extent; reference length for mesh grading.
inline double domain_extent(const Domain& d) {
    if (const auto* r = std::get_if<RectDomain>(&d)) return std::max(r->width(), r->height());
    return 2.0 * std::get<DiskDomain>(d).radius;
}

inline bool domain_contains(const Domain& d, const Vec2& p) {
    if (const auto* r = std::get_if<RectDomain>(&d))
        return p.x > r->x0 && p.x < r->x1 && p.y > r->y0 && p.y < r->y1;
    const auto& c = std::get<DiskDomain>(d);
    return (p - c.center).norm() < c.radius;
}

/// Distance from p to the domain boundary (positive inside).
inline double domain_boundary_distance(const Domain& d, const Vec2& p) {
    if (const auto* r = std::get_if<RectDomain>(&d))
        return std::min(std::min(p.x - r->x0, r->x1 - p.x), std::min(p.y - r->y0, r->y1 - p.y));
    const auto& c = std::get<DiskDomain>(d);
    return c.radius - (p - c.center).norm();
}

/// Open ball used to describe control regions.
struct BallSpec {
    Vec2 center;
    double radius;
};

/// Open axis-aligned box used to describe control regions.
struct BoxSpec {
    double x0, x1, y0, y1;
};

using RegionSpec = std::variant<BallSpec, BoxSpec>;

inline bool region_contains(const RegionSpec& r, const Vec2& p) {
    if (const auto* b = std::get_if<BallSpec>(&r)) return (p - b->center).norm() < b->radius;
    const auto& box = std::get<BoxSpec>(r);
    return p.x > box.x0 && p.x < box.x1 && p.y > box.y0 && p.y < box.y1;
}

inline Vec2 region_center(const RegionSpec& r) {
    if (const auto* b = std::get_if<BallSpec>(&r)) return b->center;
    const auto& box = std::get<BoxSpec>(r);
    return {0.5 * (box.x0 + box.x1), 0.5 * (box.y0 + box.y1)};
}

inline double region_inradius(const RegionSpec& r) {
    if (const auto* b = std::get_if<BallSpec>(&r)) return b->radius;
    const auto& box = std::get<BoxSpec>(r);
    return 0.5 * std::min(box.x1 - box.x0, box.y1 - box.y0);
}

/// Euclidean distance from p to the closed segment [a,b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squared_norm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

/// Euclidean distance from p to the closed triangle (a,b,c); zero inside.
inline double point_triangle_distance(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    const double d1 = cross(b - a, p - a);
    const double d2 = cross(c - b, p - b);
    const double d3 = cross(a - c, p - c);
    const bool all_nonneg = d1 >= 0 && d2 >= 0 && d3 >= 0;
    const bool all_nonpos = d1 <= 0 && d2 <= 0 && d3 <= 0;
    if (all_nonneg || all_nonpos) return 0.0;
    return std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c),
                     point_segment_distance(p, c, a)});
}

}  // namespace degctrl
