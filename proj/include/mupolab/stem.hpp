#pragma once

/// @file stem.hpp
/// @brief Bouncing-ball stickiness of rectangular stems: reflection process in
///        the hat, escape-time hyperbolae, survivor polygons and the constant C.
///
/// Initial conditions (x, theta) sit on the wall carrying the hole, x measured
/// upward from the stem base, theta the small angle to the horizontal.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hat.hpp"

namespace mupolab {

struct StemCase {
    double rho = 0.5;
    int zeta = 2;
    double L = 1.0;
    double h_minus = 0.0;
    double h_plus = 0.0;
    double R = 1.0;
    double norm = 1.0;  ///< 2 |dQ| B
    bool degenerate = false;

    double r() const { return rho * R; }
    double u() const { return 2.0 * zeta * rho - 1.0; }
    /// Window edges in omega = d1 / (2 R theta).
    double omega1() const { return rho * (rho + 1.0) / (2.0 * rho + 1.0); }
    double omega2() const { return zeta * rho * rho / u(); }
};

/// Build a case from explicit numbers; norm is the ergodic normalisation 2|dQ|B.
inline StemCase make_stem_case(double rho, double L, double h_minus, double h_plus, double R = 1.0,
                               double norm = 1.0) {
    if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCode::InvalidGeometry, "rho must lie in (0, 1)");
    if (!(h_minus >= 0.0 && h_minus < h_plus && h_plus < L))
        throw Error(ErrorCode::InvalidGeometry, "require 0 <= h- < h+ < L");
    StemCase c;
    c.rho = rho;
    c.R = R;
    const double inv = 1.0 / rho;
    const double nearest = std::round(inv);
    c.degenerate = nearest >= 2.0 && std::abs(inv - nearest) < 1e-12 * inv;
    c.zeta = static_cast<int>(c.degenerate ? nearest : std::ceil(inv));
    c.L = L;
    c.h_minus = h_minus;
    c.h_plus = h_plus;
    c.norm = norm;
    return c;
}

inline StemCase make_stem_case(const BoundaryModel& model) {
    const auto& spec = model.spec();
    if (spec.stem != StemKind::Rectangular || !spec.hole || spec.hole->wall != HoleWall::RectStemRightWall)
        throw Error(ErrorCode::InvalidConfig, "stem analytics need a rectangular stem with a wall hole");
    return make_stem_case(model.rho(), spec.stem_length, spec.hole->lo, spec.hole->hi, model.R(),
                          2.0 * model.perimeter() * ergodic_measure(model));
}

/// How the orbits starting below the hole are counted.
enum class DirectCount {
    Single,     ///< each initial condition counted once
    Published,  ///< the reference sum (2h-)^2 + (h-)^2, which counts the upward ones twice
};

/// Coefficient of 1/t from orbits that never reach the hat, both stem walls included.
inline double direct_regular_C(const StemCase& c, DirectCount mode = DirectCount::Single) {
    const double hm = c.h_minus;
    const double above = (c.L - c.h_plus) * (c.L - c.h_plus);
    const double below = mode == DirectCount::Single ? 4.0 * hm * hm : 5.0 * hm * hm;
    return (below + above) / c.norm;
}

struct Reflection {
    int k = 1;
    double theta_f = 0.0;
    long long n = 0;  ///< wall-to-wall collisions before entering the hat
    double d1 = 0.0;
    double omega = 0.0;
};

/// Number k of arc collisions and exit angle of a near-horizontal orbit.
inline Reflection reflection_outcome(double x, double theta, const StemCase& c) {
    if (!(x > c.h_plus && x < c.L)) throw Error(ErrorCode::DomainError, "require h+ < x < L");
    if (!(theta > 0.0)) throw Error(ErrorCode::DomainError, "require theta > 0");
    Reflection out;
    const double step = 2.0 * c.r() * std::tan(theta);
    out.n = static_cast<long long>(std::floor((c.L - x) / step));
    out.d1 = c.L - x - static_cast<double>(out.n) * step;
    out.omega = out.d1 / (2.0 * c.R * theta);
    if (out.omega < c.omega1())
        out.k = 1;
    else if (out.omega < c.omega2())
        out.k = c.zeta + 1;
    else
        out.k = c.zeta;
    out.theta_f = 2.0 * out.k * out.d1 / c.R - (2.0 * out.k * c.rho + 1.0) * theta;
    return out;
}

/// Small-angle escape time through the hole.
inline double escape_time(double x, double theta, const Reflection& ref, const StemCase& c) {
    return (c.L - x) / theta + (c.L - c.h_plus) / std::abs(ref.theta_f) +
           2.0 * c.R * (c.rho + ref.k + 1.0);
}

inline double escape_time(double x, double theta, const StemCase& c) {
    return escape_time(x, theta, reflection_outcome(x, theta, c), c);
}

struct PhasePoint {
    double x = 0.0;
    double theta = 0.0;
};

/// Corners A..F of the survivor polygon for fixed n, plus G = (L, 0).
struct PolygonCorners {
    std::array<PhasePoint, 6> corner;  ///< A, B, C, D, E, F
    PhasePoint G;

    const PhasePoint& operator[](char name) const { return corner[static_cast<std::size_t>(name - 'A')]; }
};

/// Each corner as (omega, k): A = (w1, 1), B = (w1, z+1), C = (w2, z+1),
/// D = (w2, z), E = (rho, z), F = (0, 1).
struct CornerSpec {
    double omega;
    int k;
};

inline std::array<CornerSpec, 6> corner_specs(const StemCase& c) {
    return {{{c.omega1(), 1},
             {c.omega1(), c.zeta + 1},
             {c.omega2(), c.zeta + 1},
             {c.omega2(), c.zeta},
             {c.rho, c.zeta},
             {0.0, 1}}};
}

/// |theta_f / theta| on the ray of fixed omega.
inline double exit_ratio(double omega, int k, double rho) {
    return std::abs(4.0 * k * omega - 2.0 * k * rho - 1.0);
}

/// Hat flight time 2R(rho + k + offset). Offset 1 matches the escape-time
/// formula; offset 0 reproduces the tabulated corner expressions.
inline PolygonCorners polygon_corners(long long n, double t, const StemCase& c, double offset = 1.0) {
    PolygonCorners out;
    const auto specs = corner_specs(c);
    for (std::size_t i = 0; i < 6; ++i) {
        const double a = 2.0 * c.R * (c.rho * static_cast<double>(n) + specs[i].omega);
        const double T = 2.0 * c.R * (c.rho + specs[i].k + offset);
        const double th = (c.L - c.h_plus) / (exit_ratio(specs[i].omega, specs[i].k, c.rho) * (t - T - a));
        out.corner[i] = {c.L - a * th, th};
    }
    out.G = {c.L, 0.0};
    return out;
}

/// The tabulated corner expressions, transcribed term by term.
inline PolygonCorners published_corners(long long n_, double t, const StemCase& c) {
    const double r = c.rho, R = c.R, L = c.L, hp = c.h_plus, n = static_cast<double>(n_);
    const double Z = c.zeta;
    PolygonCorners out;
    const double Ax = (-2 * (hp * r * (1 + 2 * r) * (1 + n + r + 2 * n * r) -
                             L * (1 + r) * (1 + 2 * (2 + n) * r + (2 + 4 * n) * r * r)) +
                       R * (-2 * L * r * R - L * R) * t) /
                      (2 + 2 * (4 + n) * r + (6 + 4 * n) * r * r + R * (-2 * r * R - R) * t);
    const double At = (hp - L) * (1 + 2 * r) * (1 + 2 * r) / (2 * R * (1 + r * (4 + n + 3 * r + 2 * n * r)) - t * (1 + 2 * r));
    const double dB = (2 * Z * r - 1) * (-t * (1 + 2 * r) + 2 * R * (1 + Z + 2 * Z * r + r * (4 + n + 3 * r + 2 * n * r)));
    const double Bx = (-2 * hp * R * r * (1 + 2 * r) * (1 + n + r + 2 * n * r) +
                       L * (-2 * (1 + Z) * R + t + 4 * (1 + 3 * Z + 2 * (1 + Z) * n) * R * r * r * r)) / dB +
                      2 * r * (t - Z * t * (1 + 2 * L * r) + R * (-3 + 2 * Z * Z + 2 * L * (n + Z * (4 + 2 * Z + n)) * r)) / dB;
    const double Bt = (hp - L) * (2 * r + 1) * (2 * r + 1) / dB;
    const double dC = (1 + 2 * r) * (t - 2 * Z * t * r + 2 * R * (-1 - Z + (-1 + 2 * Z * (1 + Z) - n) * r + Z * (3 + 2 * n) * r * r));
    const double Cx = L - 2 * (hp - L) * R * r * (2 * Z * r - 1) * (Z * r + n * (2 * Z * r - 1)) / dC;
    const double Ct = (hp - L) * (1 - 2 * Z * r) * (1 - 2 * Z * r) / dC;
    const double dD = -t - 4 * Z * Z * R * r + 2 * (1 + n) * R * r + 2 * Z * (R + t * r - (3 + 2 * n) * R * r * r);
    const double Dx = (2 * (L + hp * n) * R * r - L * t + 4 * Z * Z * R * r * ((hp - L) * (1 + 2 * n) * r * r - L) +
                       2 * Z * (L * R + L * t * r - (hp - 2 * L * (n - 1) + 4 * hp * n) * R * r * r)) / dD;
    const double Dt = (hp - L) * (1 - 2 * Z * r) * (1 - 2 * Z * r) /
                      (-2 * Z * R + t - 2 * ((1 - 2 * Z * Z + n) * R + Z * t) * r + 2 * Z * (3 + 2 * n) * R * r * r);
    const double Ex = (L * t + 4 * Z * Z * L * R * r - 2 * (hp + L + hp * n) * R * r +
                       2 * Z * L * (R * (-1 + 2 * (2 + n) * r * r) - t * r)) /
                      ((2 * Z * r - 1) * (2 * R * (Z + (2 + n) * r) - t));
    const double Et = (hp - L) / ((-1 + 2 * Z * r) * (-t + 2 * R * (Z + (2 + n) * r)));
    const double Fx = (L * (2 * R * (1 + r) * (1 + 2 * (1 + n) * r) - t * (1 + 2 * r)) - 2 * hp * n * R * r) /
                      ((1 + 2 * r) * (2 * R * (1 + r + n * r) - t));
    const double Ft = (hp - L) / ((1 + 2 * r) * (-t + 2 * R * (1 + r + n * r)));
    out.corner = {{{Ax, At}, {Bx, Bt}, {Cx, Ct}, {Dx, Dt}, {Ex, Et}, {Fx, Ft}}};
    out.G = {L, 0.0};
    return out;
}

/// The ordering of the corners' crossing values in the large-t limit.
/// Hat iff (2 zeta rho - 1)^2 <= 2 rho + 1.
inline StemOrdering continuum_ordering(const StemCase& c) {
    return c.u() * c.u() <= 2.0 * c.rho + 1.0 ? StemOrdering::Hat : StemOrdering::Tilde;
}

struct CornerThresholds {
    std::array<long long, 6> n{};  ///< n_A .. n_F
    double published_nA = 0.0;     ///< the reference closed form for n_A, before flooring
    StemOrdering ordering = StemOrdering::Hat;

    long long operator[](char name) const { return n[static_cast<std::size_t>(name - 'A')]; }
};

/// Largest n for which corner X still lies right of the hole edge h+.
/// x_X(n) = h+ reduces to a = c (t - T)/(1 + c), independent of L and h+.
inline std::array<long long, 6> threshold_values(double t, const StemCase& c, double offset = 1.0) {
    std::array<long long, 6> n{};
    const auto specs = corner_specs(c);
    for (std::size_t i = 0; i < 6; ++i) {
        const double q = exit_ratio(specs[i].omega, specs[i].k, c.rho);
        const double T = 2.0 * c.R * (c.rho + specs[i].k + offset);
        const double a = q * (t - T) / (1.0 + q);
        n[i] = static_cast<long long>(std::floor((a - 2.0 * c.R * specs[i].omega) / (2.0 * c.R * c.rho)));
    }
    return n;
}

/// Thresholds plus the chain they satisfy.
inline CornerThresholds corner_thresholds(double t, const StemCase& c, double offset = 1.0) {
    CornerThresholds out;
    out.n = threshold_values(t, c, offset);
    const double r = c.rho;
    out.published_nA = (t / c.R * (1 + 2 * r) - 2 - 20 * r - 12 * r * r - 4 * r * r * r) /
                       (4 * r + 12 * r * r + 8 * r * r * r);
    const auto& v = out.n;  // A B C D E F
    const bool hat = v[0] < v[1] && v[1] <= v[3] && v[3] < v[4] && v[4] <= v[2] && v[2] < v[5];
    const bool tilde = v[0] < v[3] && v[3] <= v[1] && v[1] < v[2] && v[2] <= v[4] && v[4] < v[5];
    if (hat && tilde)
        out.ordering = continuum_ordering(c);
    else if (hat)
        out.ordering = StemOrdering::Hat;
    else if (tilde)
        out.ordering = StemOrdering::Tilde;
    else
        throw Error(ErrorCode::OrderingAmbiguous, "corner thresholds fit neither ordering");
    return out;
}

namespace detail {

/// Integral over v in [va, vb] and over c in [c0, c1] (c > 0) of
/// min(1/(c(1-v)), 1/v)^2, with dc weight 1. vb may be infinite.
inline double band_c_integral(double va, double vb, double c0, double c1) {
    const double inf = std::numeric_limits<double>::infinity();
    const auto crit = [&](double v) { return v >= 1.0 ? inf : v / (1.0 - v); };
    const double inv_vb = std::isinf(vb) ? 0.0 : 1.0 / vb;
    const double ca = crit(va);
    const double cb = crit(vb);
    const auto clip = [](double lo, double hi, double a, double b) {
        return std::pair<double, double>{std::max(lo, a), std::min(hi, b)};
    };
    double total = 0.0;
    // c below crit(va): the hole edge binds over the whole v range.
    if (va > 0.0) {
        const auto [lo, hi] = clip(c0, c1, 0.0, ca);
        if (hi > lo) total += (hi - lo) * (1.0 / va - inv_vb);
    }
    // Crossing inside the range.
    {
        const auto [lo, hi] = clip(c0, c1, ca, cb);
        if (hi > lo) {
            const double k = 1.0 / (1.0 - va);
            // (1+c)/c^2 - k/c^2 + (1+c)/c - 1/vb
            const auto F = [&](double x) {
                return (-1.0 / x + std::log(x)) + k / x + (std::log(x) + x) - inv_vb * x;
            };
            total += F(hi) - F(lo);
        }
    }
    // c above crit(vb): the escape curve binds over the whole v range.
    if (!std::isinf(cb)) {
        const auto [lo, hi] = clip(c0, c1, cb, inf);
        if (hi > lo) total += (1.0 / (1.0 - vb) - 1.0 / (1.0 - va)) * (1.0 / lo - 1.0 / hi);
    }
    return total;
}

}  // namespace detail

/// Integral over v in [va, vb] and omega in [0, rho) of m^2 with
/// m = min(1/(c(omega)(1 - v)), 1/v).
inline double band_integral(const StemCase& c, double va, double vb) {
    struct Window {
        double w0, w1;
        int k;
    };
    const Window windows[3] = {{0.0, c.omega1(), 1}, {c.omega1(), c.omega2(), c.zeta + 1}, {c.omega2(), c.rho, c.zeta}};
    double total = 0.0;
    for (const auto& w : windows) {
        if (!(w.w1 > w.w0)) continue;
        const double s0 = 4.0 * w.k * w.w0 - 2.0 * w.k * c.rho - 1.0;
        const double s1 = 4.0 * w.k * w.w1 - 2.0 * w.k * c.rho - 1.0;
        if (s0 * s1 <= 0.0) throw Error(ErrorCode::DomainError, "exit ratio vanishes inside a window");
        const double c0 = std::min(std::abs(s0), std::abs(s1));
        const double c1 = std::max(std::abs(s0), std::abs(s1));
        total += detail::band_c_integral(va, vb, c0, c1) / (4.0 * w.k);
    }
    return total;
}

struct SevenSums {
    std::array<double, 7> sums{};  ///< coefficients of 1/t
    double total = 0.0;
    StemOrdering ordering = StemOrdering::Hat;
    std::array<double, 8> v{};  ///< band edges in v = a / t
};

/// Leading-order sums over the seven n-ranges separated by the corner
/// thresholds, as coefficients of 1/t.
inline SevenSums seven_sums(const StemCase& c) {
    SevenSums out;
    out.ordering = continuum_ordering(c);
    const auto specs = corner_specs(c);
    std::array<double, 6> q{};
    for (std::size_t i = 0; i < 6; ++i) q[i] = exit_ratio(specs[i].omega, specs[i].k, c.rho);
    // A, then B/D and E/C in ordering, then F.
    const std::array<int, 6> hat_order = {0, 1, 3, 4, 2, 5};
    const std::array<int, 6> tilde_order = {0, 3, 1, 2, 4, 5};
    const auto& ord = out.ordering == StemOrdering::Hat ? hat_order : tilde_order;
    out.v[0] = 0.0;
    for (std::size_t i = 0; i < 6; ++i) out.v[i + 1] = q[ord[i]] / (1.0 + q[ord[i]]);
    out.v[7] = std::numeric_limits<double>::infinity();
    const double scale = (c.L - c.h_plus) * (c.L - c.h_plus) / (2.0 * c.rho);
    for (std::size_t i = 0; i < 7; ++i) {
        out.sums[i] = scale * band_integral(c, out.v[i], out.v[i + 1]);
        out.total += out.sums[i];
    }
    return out;
}

/// Coefficients of the closed form
/// [(e1 rho + .. + e4 rho^4)/((2rho+1)(2 zeta rho-1)^2) + ln((2rho+1)^j1 (2 zeta rho-1)^j2)] / (4 zeta(1+zeta) rho).
struct ClosedFormCoefficients {
    std::array<double, 4> eps{};
    double j1 = 0.0;
    double j2 = 0.0;
};

/// The reference coefficient sets for the two orderings, as originally stated.
inline ClosedFormCoefficients published_coefficients(StemOrdering o, int zeta) {
    const double z = zeta, z2 = z * z, z3 = z2 * z, z4 = z3 * z, z5 = z4 * z;
    if (o == StemOrdering::Hat)
        return {{-2 - 4 * z + 4 * z3, -2 * (1 + z + z2 + 2 * z3 + 6 * z4), -12 * z2 - 8 * z3 - 4 * z4 + 8 * z5,
                 16 * z3 + 16 * z4 + 8 * z5},
                1 + 7 * z + 3 * z2,
                -6 * z - 2 * z2};
    return {{8 + 18 * z + 2 * z2 - 8 * z3, 8 + 12 * z - 20 * z2 + 24 * z4, -16 * z2 + 8 * z3 + 8 * z4 - 16 * z5,
             16 * (z3 + z4)},
            -4 - 8 * z - 2 * z2,
            6 + 12 * z + 4 * z2};
}

/// Coefficients obtained by summing the seven sums exactly; the same set
/// serves both orderings.
inline ClosedFormCoefficients derived_coefficients(int zeta) {
    const double z = zeta;
    const double f = 2.0 * z * (1.0 + z);
    return {{f, f * (2.0 - 4.0 * z), f * (4.0 * z * z - 8.0 * z), f * 8.0 * z * z}, 2.0 * z * z + 4.0 * z, 2.0};
}

/// Bracketed closed form divided by 4 zeta (1 + zeta) rho.
inline double closed_form_core(double rho, int zeta, const ClosedFormCoefficients& k) {
    const double u = 2.0 * zeta * rho - 1.0;
    const double poly = rho * (k.eps[0] + rho * (k.eps[1] + rho * (k.eps[2] + rho * k.eps[3])));
    const double bracket =
        poly / ((2.0 * rho + 1.0) * u * u) + k.j1 * std::log(2.0 * rho + 1.0) + k.j2 * std::log(std::abs(u));
    return bracket / (4.0 * zeta * (1.0 + zeta) * rho);
}

/// Survivor measure of one side, times t / (L - h+)^2.
inline double stem_core(const StemCase& c) {
    return closed_form_core(c.rho, c.zeta, derived_coefficients(c.zeta));
}

inline double published_stem_core(const StemCase& c) {
    return closed_form_core(c.rho, c.zeta, published_coefficients(continuum_ordering(c), c.zeta));
}

/// The reference per-range sums, as originally stated, as coefficients of 1/t, for the case's ordering.
inline std::array<double, 7> published_sums(const StemCase& c) {
    const double r = c.rho, z = c.zeta, l2 = (c.L - c.h_plus) * (c.L - c.h_plus);
    const double u = 2 * z * r - 1;
    const auto ln = [](double x) { return std::log(std::abs(x)); };
    std::array<double, 7> s{};
    s[0] = l2 / (2 * (2 * r + 1));
    s[6] = l2 * (r + 1) / (2 * r + 1);
    if (continuum_ordering(c) == StemOrdering::Hat) {
        s[1] = l2 / (4 * r) * (((4 + 2 * z) * r + (-8 * z - 2 * z * z) * r * r + 4 * z * z * r * r * r) / (u * (2 * r + 1)) + ln(u));
        s[2] = l2 / (4 * (1 + z) * r) *
               (2 * r * (-1 + 2 * z * (z * r) - 1) * (2 * r + z * (-1 + r + 2 * z * r - 2 * r * r)) / ((1 + 2 * r) * u * u) +
                (2 + z) * ln((2 * r + 1) / (u * u)));
        s[3] = l2 / (4 * z * (1 + z) * r) *
               (-2 * r * (1 + z - z * z + 2 * z * z * z * r) * (1 + r * (1 + 2 * z * (-1 + z * r))) / ((1 + 2 * r) * u * u) +
                (1 + 3 * z + z * z) * ln(2 * r - 1));
        s[4] = l2 / (4 * (1 + z) * r) *
               (2 * r * (-1 + 2 * z * (-1 + z * r)) * (2 * r + z * (-1 + r + 2 * z * r - 2 * r * r)) / ((1 + 2 * r) * u * u) +
                (2 + z) * ln((2 * r + 1) / (u * u)));
        s[5] = l2 / (4 * r) * (2 * r * (z * r - 1) * (z * (2 * r - 1) - 2) / ((1 + 2 * r) * u) + ln(u));
    } else {
        const double p26 = l2 / (4 * r) * (((2 - 2 * z) * r + (2 - 4 * z + 2 * z * z) * r * r) / (u * (2 * r + 1)) + ln((2 * r + 1) / u));
        const double p35 = l2 / (4 * z * r) *
                           (2 * r * (1 + r + 2 * z * z * r - z * (1 + r)) * (1 - 2 * z * (z * r - 1)) / ((1 + 2 * r) * u * u) +
                            (1 + z) * ln(u * u / (2 * r + 1)));
        s[1] = p26;
        s[2] = p35;
        s[3] = l2 / (4 * z * (1 + z) * r) *
               (4 * (1 + z) * r * (1 - (z - 1) * r) * (1 + z - z * z + 2 * z * z * z * r) / ((1 + 2 * r) * u * u) +
                (1 + 3 * z + z * z) * ln(u * u / ((2 * r + 1) * (2 * r + 1))));
        s[4] = p35;
        s[5] = p26;
    }
    return s;
}

/// Full coefficient of 1/t: direct orbits plus both mirror halves of the
/// bouncing-ball polygons, normalised by 2|dQ|B.
inline double stem_C(const StemCase& c, DirectCount mode = DirectCount::Single) {
    const double l2 = (c.L - c.h_plus) * (c.L - c.h_plus);
    return direct_regular_C(c, mode) + 2.0 * l2 * stem_core(c) / c.norm;
}

/// Half-stadium value of the core, (3 ln 3 + 2)/4.
inline double stadium_core() { return (3.0 * std::log(3.0) + 2.0) / 4.0; }

/// Exact (x, theta) area of the survivor polygons summed over n, each clipped
/// to x >= h+. Edges between corners are chords of the escape hyperbolae.
inline double polygon_area_sum(const StemCase& c, double t, double offset = 1.0) {
    const auto th = threshold_values(t, c, offset);
    const long long n_end = std::max<long long>(0, *std::max_element(th.begin(), th.end()) + 1);
    const auto specs = corner_specs(c);
    const double lh = c.L - c.h_plus;
    double total = 0.0;
    std::vector<PhasePoint> poly, clipped;
    for (long long n = 0; n < n_end; ++n) {
        const PolygonCorners pc = polygon_corners(n, t, c, offset);
        poly.clear();
        poly.push_back(pc.G);
        for (char name : {'F', 'A', 'B', 'C', 'D', 'E'}) {
            PhasePoint p = pc[name];
            if (!(p.theta > 0.0)) {
                // Beyond the pole the escape curve no longer binds; any point
                // far left on the same ray clips identically.
                const std::size_t i = static_cast<std::size_t>(name - 'A');
                const double a = 2.0 * c.R * (c.rho * static_cast<double>(n) + specs[i].omega);
                p.theta = 10.0 * lh / std::max(a, 1e-300);
                p.x = c.L - a * p.theta;
            }
            poly.push_back(p);
        }
        clipped.clear();
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const PhasePoint& p = poly[i];
            const PhasePoint& q = poly[(i + 1) % poly.size()];
            const bool pin = p.x >= c.h_plus;
            const bool qin = q.x >= c.h_plus;
            if (pin) clipped.push_back(p);
            if (pin != qin) {
                const double s = (c.h_plus - p.x) / (q.x - p.x);
                clipped.push_back({c.h_plus, p.theta + s * (q.theta - p.theta)});
            }
        }
        double twice = 0.0;
        for (std::size_t i = 0; i < clipped.size(); ++i) {
            const PhasePoint& p = clipped[i];
            const PhasePoint& q = clipped[(i + 1) % clipped.size()];
            twice += p.x * q.theta - q.x * p.theta;
        }
        total += 0.5 * std::abs(twice);
    }
    // Remaining wedges are triangles cut by x = h+; their sum telescopes.
    const double a_end = 2.0 * c.R * c.rho * static_cast<double>(n_end);
    if (a_end > 0.0) total += 0.5 * lh * lh / a_end;
    return total;
}

}  // namespace mupolab
