#pragma once

/// @file geometry.hpp
/// @brief Mushroom billiard domain, specular collision map and Birkhoff coordinates.
///
/// The hat is a circular arc of radius R centred at the origin, spanning the
/// angles [pi/2 - pi*alpha, pi/2 + pi*alpha]. Its straight walls run radially
/// from R down to r and meet the stem. The stem hangs below the origin.
/// Boundary arclength z starts at the right end of the arc and increases
/// anticlockwise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace mupolab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 normalized(Vec2 a) { return a * (1.0 / norm(a)); }

enum class StemKind { Triangular, Rectangular };
enum class HoleWall { RectStemRightWall, TriangularStemEdge };

/// Hole (h-, h+) on one stem wall. Rectangular walls are measured upward from
/// the stem base; triangular edges are measured from the hat-base end.
struct HoleSpec {
    HoleWall wall = HoleWall::RectStemRightWall;
    double lo = 0.0;
    double hi = 0.0;

    double size() const { return hi - lo; }
};

struct MushroomSpec {
    double hat_radius = 1.0;
    double stem_half_width = 0.5;
    double hat_fraction = 0.5;
    StemKind stem = StemKind::Rectangular;
    double stem_length = 1.0;
    std::optional<HoleSpec> hole;

    double rho() const { return stem_half_width / hat_radius; }
    /// Magic number ceil(R/r).
    int zeta() const { return static_cast<int>(std::ceil(hat_radius / stem_half_width)); }
};

enum class SegmentKind : std::uint8_t { Arc, Line };
enum class SegmentRole : std::uint8_t { HatArc, HatWall, StemWall, StemBase };

struct Segment {
    SegmentKind kind = SegmentKind::Line;
    SegmentRole role = SegmentRole::StemWall;
    Vec2 a;        ///< start point (boundary order)
    Vec2 b;        ///< end point
    Vec2 tangent;  ///< lines: unit tangent in the direction of increasing z
    Vec2 normal;   ///< lines: unit inward normal
    double phi0 = 0.0;  ///< arcs: start angle
    double phi1 = 0.0;  ///< arcs: end angle
    double z0 = 0.0;
    double length = 0.0;

    bool on_hat() const { return role == SegmentRole::HatArc || role == SegmentRole::HatWall; }
};

struct BirkhoffCoord {
    double z = 0.0;
    double sin_theta = 0.0;
};

struct ParticleState {
    Vec2 position;
    Vec2 direction;
    double time = 0.0;
};

enum class StepStatus { Ok, CornerHit, NumericalStall };

struct StepResult {
    ParticleState state;
    double flight_time = 0.0;
    int segment = -1;
    StepStatus status = StepStatus::Ok;
};

inline constexpr double corner_tolerance = 1e-10;
inline constexpr double min_flight = 1e-12;
inline constexpr double stall_flight = 1e-13;

class BoundaryModel {
public:
    explicit BoundaryModel(const MushroomSpec& spec) : spec_(spec) { build(); }

    const MushroomSpec& spec() const { return spec_; }
    const std::vector<Segment>& segments() const { return segments_; }
    double perimeter() const { return perimeter_; }
    double area() const { return area_; }
    double hat_area() const { return hat_area_; }
    double stem_area() const { return area_ - hat_area_; }
    double R() const { return spec_.hat_radius; }
    double r() const { return spec_.stem_half_width; }
    double rho() const { return spec_.rho(); }
    int hole_segment() const { return hole_segment_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// Arclength of p along the hole's wall, in the hole's own convention.
    double wall_coordinate(Vec2 p) const { return dot(p - hole_origin_, hole_axis_); }

    bool in_hole(int segment, Vec2 p) const {
        if (segment != hole_segment_) return false;
        const double s = wall_coordinate(p);
        return s > spec_.hole->lo && s < spec_.hole->hi;
    }

    /// Point at arclength s along the hole's wall.
    Vec2 wall_point(double s) const { return hole_origin_ + hole_axis_ * s; }

    /// Index of the segment holding arclength z (taken modulo the perimeter).
    int segment_at(double z) const {
        z = wrap_z(z);
        for (std::size_t i = 0; i + 1 < segments_.size(); ++i)
            if (z < segments_[i + 1].z0) return static_cast<int>(i);
        return static_cast<int>(segments_.size()) - 1;
    }

    double wrap_z(double z) const {
        z = std::fmod(z, perimeter_);
        return z < 0.0 ? z + perimeter_ : z;
    }

    /// Point and unit tangent/inward normal at arclength z.
    void frame_at(double z, Vec2& point, Vec2& tangent, Vec2& normal, int& segment) const {
        segment = segment_at(z);
        const Segment& s = segments_[segment];
        const double u = wrap_z(z) - s.z0;
        if (s.kind == SegmentKind::Line) {
            point = s.a + s.tangent * u;
            tangent = s.tangent;
            normal = s.normal;
        } else {
            const double phi = s.phi0 + u / R();
            point = {R() * std::cos(phi), R() * std::sin(phi)};
            tangent = {-std::sin(phi), std::cos(phi)};
            normal = {-std::cos(phi), -std::sin(phi)};
        }
    }

    /// Membership test for the closed domain, with tolerance.
    bool contains(Vec2 p, double tol = 1e-12) const {
        const double R0 = R();
        const double r0 = r();
        const double L = spec_.stem_length;
        const double ca = std::cos(std::numbers::pi * spec_.hat_fraction);
        const double rp = norm(p);
        // Hat wedge: within radius R and within the angular half-width.
        if (rp <= R0 + tol && p.y >= ca * rp - tol * 2.0) return true;
        if (spec_.stem == StemKind::Rectangular)
            return std::abs(p.x) <= r0 + tol && p.y <= tol && p.y >= -L - tol;
        // Triangle spanned by the inner wall ends and the apex.
        const Vec2 apex{0.0, -L};
        const Vec2 left = segments_[2].a;
        const Vec2 right = segments_[3].b;
        const double c1 = cross(apex - left, p - left);
        const double c2 = cross(right - apex, p - apex);
        const double c3 = cross(left - right, p - right);
        return c1 >= -tol && c2 >= -tol && c3 >= -tol;
    }

    /// Perpendicular distance from the hat centre to the line through p along d.
    static double line_distance(Vec2 p, Vec2 d) { return std::abs(cross(p, d)); }

private:
    void add_line(Vec2 a, Vec2 b, SegmentRole role) {
        Segment s;
        s.kind = SegmentKind::Line;
        s.role = role;
        s.a = a;
        s.b = b;
        s.length = norm(b - a);
        s.tangent = (b - a) * (1.0 / s.length);
        s.normal = {-s.tangent.y, s.tangent.x};
        segments_.push_back(s);
    }

    void build() {
        const double R0 = spec_.hat_radius;
        const double r0 = spec_.stem_half_width;
        const double L = spec_.stem_length;
        const double alpha = spec_.hat_fraction;
        if (!(R0 > 0.0) || !(r0 > 0.0) || !(r0 < R0))
            throw Error(ErrorCode::InvalidGeometry, "require 0 < r < R");
        if (!(L > 0.0)) throw Error(ErrorCode::InvalidGeometry, "require L > 0");
        if (!(alpha > 0.0) || alpha > 0.5)
            throw Error(ErrorCode::InvalidGeometry, "billiard geometry requires 0 < alpha <= 1/2");
        if (spec_.stem == StemKind::Rectangular && alpha != 0.5)
            throw Error(ErrorCode::InvalidGeometry, "rectangular stems need a semicircular hat");

        const double pi = std::numbers::pi;
        const double pa = pi / 2.0 - pi * alpha;
        const double pb = pi / 2.0 + pi * alpha;
        const Vec2 ua{std::cos(pa), std::sin(pa)};
        const Vec2 ub{std::cos(pb), std::sin(pb)};
        // Snap the semicircle's base onto y = 0 exactly.
        const Vec2 ua_s = alpha == 0.5 ? Vec2{1.0, 0.0} : ua;
        const Vec2 ub_s = alpha == 0.5 ? Vec2{-1.0, 0.0} : ub;

        Segment arc;
        arc.kind = SegmentKind::Arc;
        arc.role = SegmentRole::HatArc;
        arc.phi0 = pa;
        arc.phi1 = pb;
        arc.a = ua_s * R0;
        arc.b = ub_s * R0;
        arc.length = R0 * (pb - pa);
        segments_.push_back(arc);

        add_line(ub_s * R0, ub_s * r0, SegmentRole::HatWall);
        const Vec2 left = ub_s * r0;
        const Vec2 right = ua_s * r0;
        if (spec_.stem == StemKind::Triangular) {
            const Vec2 apex{0.0, -L};
            add_line(left, apex, SegmentRole::StemWall);
            add_line(apex, right, SegmentRole::StemWall);
        } else {
            add_line(left, {-r0, -L}, SegmentRole::StemWall);
            add_line({-r0, -L}, {r0, -L}, SegmentRole::StemBase);
            add_line({r0, -L}, right, SegmentRole::StemWall);
        }
        add_line(right, ua_s * R0, SegmentRole::HatWall);

        double z = 0.0;
        for (auto& s : segments_) {
            s.z0 = z;
            z += s.length;
        }
        perimeter_ = z;

        // Green's theorem over the boundary, arcs included.
        double twice_area = 0.0;
        for (const auto& s : segments_) {
            if (s.kind == SegmentKind::Arc)
                twice_area += R0 * R0 * (s.phi1 - s.phi0);
            else
                twice_area += cross(s.a, s.b);
        }
        area_ = 0.5 * twice_area;
        // Hat: the sector between the radial walls; everything else is stem.
        hat_area_ = alpha * pi * R0 * R0;

        if (spec_.hole) {
            const HoleSpec& h = *spec_.hole;
            int idx = -1;
            if (h.wall == HoleWall::RectStemRightWall) {
                if (spec_.stem != StemKind::Rectangular)
                    throw Error(ErrorCode::InvalidGeometry, "rectangular-wall hole on a triangular stem");
                idx = 4;
                hole_origin_ = {r0, -L};
                hole_axis_ = {0.0, 1.0};
            } else {
                if (spec_.stem != StemKind::Triangular)
                    throw Error(ErrorCode::InvalidGeometry, "triangular-edge hole on a rectangular stem");
                idx = 3;
                hole_origin_ = right;
                hole_axis_ = normalized(Vec2{0.0, -L} - right);
            }
            const double len = segments_[idx].length;
            if (!(h.lo >= 0.0) || !(h.hi > h.lo) || !(h.hi <= len))
                throw Error(ErrorCode::InvalidGeometry, "hole must satisfy 0 <= lo < hi <= wall length");
            if (h.size() > 0.2 * len) warnings_.push_back("hole larger than 20% of its wall");
            hole_segment_ = idx;
        }
    }

    MushroomSpec spec_;
    std::vector<Segment> segments_;
    double perimeter_ = 0.0;
    double area_ = 0.0;
    double hat_area_ = 0.0;
    int hole_segment_ = -1;
    Vec2 hole_origin_;
    Vec2 hole_axis_;
    std::vector<std::string> warnings_;
};

inline BoundaryModel build_boundary(const MushroomSpec& spec) { return BoundaryModel(spec); }

/// Advance to the next wall collision and reflect specularly.
///
/// `from_segment` is the segment the particle currently sits on (or -1 when
/// strictly inside). A corner hit leaves the state at the impact point without
/// reflecting it.
inline StepResult next_collision(const ParticleState& state, const BoundaryModel& model,
                                 int from_segment = -1) {
    const Vec2 p = state.position;
    const Vec2 d = state.direction;
    const double R = model.R();
    const double arc_floor = R * std::cos(std::numbers::pi * model.spec().hat_fraction);
    const auto& segs = model.segments();

    double best = std::numeric_limits<double>::infinity();
    int best_seg = -1;

    for (std::size_t i = 0; i < segs.size(); ++i) {
        const Segment& s = segs[i];
        const int id = static_cast<int>(i);
        if (s.kind == SegmentKind::Line) {
            if (id == from_segment) continue;
            const double denom = dot(d, s.normal);
            if (denom >= 0.0) continue;
            const double t = dot(s.a - p, s.normal) / denom;
            if (!(t > min_flight) || t >= best) continue;
            const double u = dot(p + d * t - s.a, s.tangent);
            if (u < -corner_tolerance || u > s.length + corner_tolerance) continue;
            best = t;
            best_seg = id;
        } else {
            const double b = dot(p, d);
            const double c = dot(p, p) - R * R;
            const double disc = b * b - c;
            if (disc < 0.0) continue;
            const double sq = std::sqrt(disc);
            double t1, t2;
            if (b < 0.0) {
                t2 = -b + sq;
                t1 = c / t2;
            } else {
                t1 = -b - sq;
                t2 = t1 != 0.0 ? c / t1 : 0.0;
            }
            if (t1 > t2) std::swap(t1, t2);
            for (double t : {t1, t2}) {
                if (id == from_segment && t != t2) continue;
                if (!(t > min_flight) || t >= best) continue;
                if (p.y + d.y * t < arc_floor - corner_tolerance) continue;
                best = t;
                best_seg = id;
                break;
            }
        }
    }

    StepResult out;
    out.state = state;
    if (best_seg < 0 || best < stall_flight) {
        out.status = StepStatus::NumericalStall;
        return out;
    }
    const Segment& s = segs[best_seg];
    Vec2 hit = p + d * best;
    Vec2 n;
    bool corner = false;
    if (s.kind == SegmentKind::Line) {
        const double u = dot(hit - s.a, s.tangent);
        corner = u < corner_tolerance || u > s.length - corner_tolerance;
        hit = s.a + s.tangent * std::clamp(u, 0.0, s.length);
        n = s.normal;
    } else {
        hit = hit * (R / norm(hit));
        corner = norm(hit - s.a) < corner_tolerance || norm(hit - s.b) < corner_tolerance;
        n = hit * (-1.0 / R);
    }
    out.state.position = hit;
    out.state.time = state.time + best;
    out.flight_time = best;
    out.segment = best_seg;
    if (corner) {
        out.status = StepStatus::CornerHit;
        return out;
    }
    const Vec2 r = d - n * (2.0 * dot(d, n));
    out.state.direction = normalized(r);
    return out;
}

/// Boundary arclength and segment for a point lying on the boundary.
inline std::pair<double, int> locate_on_boundary(Vec2 p, const BoundaryModel& model,
                                                 double tol = 1e-9) {
    const auto& segs = model.segments();
    double best = std::numeric_limits<double>::infinity();
    double best_z = 0.0;
    int best_seg = -1;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const Segment& s = segs[i];
        double dist, z;
        if (s.kind == SegmentKind::Line) {
            const double u = std::clamp(dot(p - s.a, s.tangent), 0.0, s.length);
            dist = norm(p - (s.a + s.tangent * u));
            z = s.z0 + u;
        } else {
            const double phi = std::clamp(std::atan2(p.y, p.x), s.phi0, s.phi1);
            const Vec2 q{model.R() * std::cos(phi), model.R() * std::sin(phi)};
            dist = norm(p - q);
            z = s.z0 + model.R() * (phi - s.phi0);
        }
        if (dist < best) {
            best = dist;
            best_z = z;
            best_seg = static_cast<int>(i);
        }
    }
    if (best > tol) throw Error(ErrorCode::NotOnBoundary, "point is not on the boundary");
    return {model.wrap_z(best_z), best_seg};
}

/// Birkhoff coordinates of an outgoing state on the boundary. The angle is
/// measured from the inward normal, positive towards increasing z.
inline BirkhoffCoord to_birkhoff(const ParticleState& state, const BoundaryModel& model) {
    const auto [z, seg] = locate_on_boundary(state.position, model);
    Vec2 point, tangent, normal;
    int s = 0;
    model.frame_at(z, point, tangent, normal, s);
    return {z, std::clamp(dot(state.direction, tangent), -1.0, 1.0)};
}

inline ParticleState from_birkhoff(BirkhoffCoord c, const BoundaryModel& model, int* segment = nullptr) {
    Vec2 point, tangent, normal;
    int s = 0;
    model.frame_at(c.z, point, tangent, normal, s);
    const double cs = std::sqrt(std::max(0.0, 1.0 - c.sin_theta * c.sin_theta));
    if (segment) *segment = s;
    return {point, normalized(tangent * c.sin_theta + normal * cs), 0.0};
}

/// True iff the collision lies on the hat and its trajectory line misses the
/// disc of radius r about the hat centre (the integrable island).
inline bool in_regular_region(BirkhoffCoord c, const BoundaryModel& model) {
    int seg = 0;
    const ParticleState st = from_birkhoff(c, model, &seg);
    if (!model.segments()[seg].on_hat()) return false;
    if (model.segments()[seg].kind == SegmentKind::Arc)
        return model.R() * std::abs(c.sin_theta) > model.r();
    return BoundaryModel::line_distance(st.position, st.direction) > model.r();
}

/// One step of the circle billiard map in (phi, psi) coordinates.
inline std::pair<double, double> circle_map_step(double phi, double psi) {
    const double two_pi = 2.0 * std::numbers::pi;
    double next = std::fmod(phi + std::numbers::pi - 2.0 * psi, two_pi);
    if (next < 0.0) next += two_pi;
    return {next, psi};
}

}  // namespace mupolab
