#pragma once

/// @file hat.hpp
/// @brief Survival prediction for mushrooms whose stickiness comes from hat MUPOs.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "geometry.hpp"
#include "mupo.hpp"

namespace mupolab {

enum class PredictionSource { HatMupos, StemBouncingBalls, Combined };
enum class StemOrdering { Hat, Tilde };

inline const char* to_string(PredictionSource s) {
    switch (s) {
    case PredictionSource::HatMupos: return "hat_mupos";
    case PredictionSource::StemBouncingBalls: return "stem_bouncing_balls";
    case PredictionSource::Combined: return "combined";
    }
    return "unknown";
}

inline const char* to_string(StemOrdering o) { return o == StemOrdering::Hat ? "hat" : "tilde"; }

struct SurvivalPrediction {
    double island_measure = 0.0;   ///< A
    double ergodic_measure = 1.0;  ///< B = 1 - A
    double escape_rate = 0.0;      ///< gamma bar
    double C = 0.0;                ///< coefficient of 1/t
    PredictionSource source = PredictionSource::HatMupos;
    std::optional<StemOrdering> ordering;
    std::optional<int> zeta;
};

namespace detail {

inline void require_semicircle(const BoundaryModel& model) {
    if (model.spec().hat_fraction != 0.5)
        throw Error(ErrorCode::UnsupportedAlpha, "closed forms assume a semicircular hat");
}

}  // namespace detail

/// Birkhoff measure of the integrable island, as a fraction of 2|dQ|.
inline double island_measure(const BoundaryModel& model) {
    detail::require_semicircle(model);
    const double R = model.R();
    const double rho = model.rho();
    const double w = R * std::sqrt(1.0 - rho * rho) - rho * R * std::acos(rho) +
                     std::numbers::pi / 2.0 * R * (1.0 - rho);
    return 4.0 * w / (2.0 * model.perimeter());
}

inline double ergodic_measure(const BoundaryModel& model) { return 1.0 - island_measure(model); }

/// Mean free path of the billiard map restricted to the ergodic component.
inline double mean_free_path(const BoundaryModel& model) {
    detail::require_semicircle(model);
    const double R = model.R();
    const double rho = model.rho();
    const double chaotic_area =
        model.stem_area() + R * R * std::asin(rho) + rho * R * R * std::sqrt(1.0 - rho * rho);
    return std::numbers::pi * chaotic_area / (ergodic_measure(model) * model.perimeter());
}

/// Exponential escape rate for the model's single hole.
inline double escape_rate(const BoundaryModel& model) {
    if (!model.spec().hole) throw Error(ErrorCode::InvalidConfig, "escape rate needs a hole");
    if (model.segments()[model.hole_segment()].on_hat())
        throw Error(ErrorCode::HoleInIsland, "hole lies on the hat");
    const double B = ergodic_measure(model);
    return model.spec().hole->size() / (mean_free_path(model) * B * model.perimeter());
}

struct ArcInterval {
    double phi1 = 0.0;
    double phi2 = 0.0;
};

/// Surviving collision angles of the k-th copy of a MUPO on the circle with slit,
/// phi measured anticlockwise from the slit's +x end.
inline ArcInterval mupo_arc_interval(const Mupo& m, long long k, double rho) {
    const double two_pi = 2.0 * std::numbers::pi;
    const long long copies = m.lambda * m.s;
    if (k < 0 || k >= copies) throw Error(ErrorCode::DomainError, "copy index out of range");
    const double sin_t = std::sin(m.theta_sj);
    if (sin_t > rho * (1.0 + 1e-15)) throw Error(ErrorCode::NotAMupoOrientation, "sin theta exceeds rho");
    const double a = std::acos(std::min(1.0, sin_t / rho));
    const double step = two_pi / static_cast<double>(copies);
    // The chord leaving phi touches the caustic at phi + pi/2 - theta.
    const double base = m.theta_sj - 0.5 * std::numbers::pi;
    const auto wrap = [&](double x) {
        x = std::fmod(x, two_pi);
        return x < 0.0 ? x + two_pi : x;
    };
    return {wrap(base + a + static_cast<double>(k) * step), wrap(base - a + static_cast<double>(k + 1) * step)};
}

/// Width 2 pi/(lambda s) - 2 arccos(sin theta / rho) of the surviving intervals,
/// evaluated in 50 digits so large s does not cancel.
inline BigFloat quad_width(long long s, long long j, const BigFloat& rho) {
    using boost::multiprecision::acos;
    using boost::multiprecision::cos;
    const BigFloat pi = bf_pi();
    const int lambda = s % 2 == 0 ? 1 : 2;
    const BigFloat sin_t = cos(pi * BigFloat(j) / BigFloat(s));
    BigFloat ratio = sin_t / rho;
    if (ratio > 1) ratio = 1;
    return 2 * pi / BigFloat(lambda * s) - 2 * acos(ratio);
}

/// Leading coefficient of Delta_{s,j}: survivor measure of one quadrilateral
/// times t, normalised by the ergodic measure 2|dQ|B.
inline double delta_sj(const Mupo& m, const BoundaryModel& model, const BigFloat& rho) {
    const double w = static_cast<double>(quad_width(m.s, m.j, rho));
    const double c = std::cos(m.theta_sj);
    const double R = model.R();
    return R * R * c * c * w * w / (2.0 * model.perimeter() * ergodic_measure(model));
}

inline double delta_sj(const Mupo& m, const BoundaryModel& model) {
    return delta_sj(m, model, BigFloat(model.rho()));
}

/// The reference closed form 8R cos^2(pi - s lambda arccos(rho sin theta))^2 /
/// (2 s^2 lambda^2 |dQ| B), kept for comparison.
inline double delta_sj_published(const Mupo& m, const BoundaryModel& model) {
    const double c = std::cos(m.theta_sj);
    const double sl = static_cast<double>(m.s * m.lambda);
    const double f = std::numbers::pi - sl * std::acos(model.rho() * std::sin(m.theta_sj));
    return 8.0 * model.R() * c * c * f * f / (2.0 * sl * sl * model.perimeter() * ergodic_measure(model));
}

/// Weighted contribution lambda (s + 2j)(Delta - delta) of one MUPO.
inline double mupo_contribution(const Mupo& m, const BoundaryModel& model, const BigFloat& rho) {
    const double d = delta_sj(m, model, rho);
    const double weight = static_cast<double>(m.lambda * (m.s + 2 * m.j));
    return weight * (m.on_border ? 0.5 * d : d);
}

inline double hat_C(const BoundaryModel& model, const std::vector<Mupo>& mupos, const BigFloat& rho) {
    double total = 0.0;
    for (const auto& m : mupos) total += mupo_contribution(m, model, rho);
    return total;
}

inline double hat_C(const BoundaryModel& model, const std::vector<Mupo>& mupos) {
    return hat_C(model, mupos, BigFloat(model.rho()));
}

struct HatSeries {
    double C = 0.0;
    double tail_bound = 0.0;  ///< bound on MUPOs beyond the last candidate examined
    std::vector<Mupo> mupos;
};

namespace detail {

/// Partial quotients of x from a 50-digit value, stopping once the
/// convergent denominators reach 1e20.
inline std::vector<BigInt> bigfloat_quotients(BigFloat x) {
    std::vector<BigInt> out;
    BigInt q1 = 0, q2 = 1;
    while (out.size() < 200) {
        const BigFloat a = boost::multiprecision::floor(x);
        out.push_back(BigInt(a));
        const BigInt q = out.back() * q1 + q2;
        q2 = q1;
        q1 = q;
        const BigFloat frac = x - a;
        if (q1 > BigInt("100000000000000000000") || frac < BigFloat("1e-40")) break;
        x = 1 / frac;
    }
    return out;
}

}  // namespace detail

/// C summed over all MUPOs with s <= s_max, then extended through the
/// convergents and intermediate fractions of theta* beyond s_max, which are
/// the only candidates there. Throws TailNotConverged if the remaining bound
/// exceeds rel_tol * C.
inline HatSeries hat_C_series(const BoundaryModel& model, const RhoInput& in, double rel_tol = 1e-6,
                              int s_max = 1000) {
    detail::require_semicircle(model);
    HatSeries out;
    out.mupos = enumerate_mupos(in, s_max);
    std::vector<BigInt> a;
    bool exact_end = false;
    if (in.theta_star) {
        const ContinuedFraction cf = expand(*in.theta_star);
        if (cf.tail == CfTail::Terminated) {
            a = cf.terms;
            exact_end = true;
        } else {
            for (std::size_t i = 0; i < 120; ++i) a.push_back(cf.a(i));
        }
    } else {
        a = detail::bigfloat_quotients(in.theta_star_value());
    }

    const long long s_cap = 1000000000000000LL;
    long long last = s_max;
    BigInt A1 = 1, A2 = 0, B1 = 0, B2 = 1;
    for (std::size_t n = 0; n < a.size(); ++n) {
        // Intermediate fractions (c A_{n-1} + A_{n-2}) / (c B_{n-1} + B_{n-2}) precede A_n/B_n.
        for (BigInt c = 1; c <= a[n]; ++c) {
            const BigInt num = c * A1 + A2;
            const BigInt den = c * B1 + B2;
            if (den <= s_max) continue;
            if (den > s_cap) break;
            const long long s = static_cast<long long>(den);
            const long long j = static_cast<long long>(num);
            if (s >= 3 && 2 * j < s) {
                if (auto m = test_mupo(in, s, j)) {
                    if (std::find(out.mupos.begin(), out.mupos.end(), *m) == out.mupos.end())
                        out.mupos.push_back(*m);
                }
            }
            last = std::max(last, s);
        }
        const BigInt A = a[n] * A1 + A2;
        const BigInt B = a[n] * B1 + B2;
        A2 = A1;
        A1 = A;
        B2 = B1;
        B1 = B;
        if (B1 > s_cap) break;
    }
    out.C = hat_C(model, out.mupos, in.rho);
    if (!exact_end || B1 > s_cap) {
        // Each later candidate adds at most 8 pi^2 R^2 / (s 2|dQ|B) and the
        // candidate denominators at least double every two steps.
        const double R = model.R();
        const double norm = 2.0 * model.perimeter() * ergodic_measure(model);
        out.tail_bound = 8.0 * std::numbers::pi * std::numbers::pi * R * R * 4.0 / (static_cast<double>(last) * norm);
    }
    if (out.tail_bound > rel_tol * std::max(out.C, 1e-300) && out.C > 0.0)
        throw Error(ErrorCode::TailNotConverged, "tail bound exceeds the requested tolerance");
    return out;
}

inline SurvivalPrediction predict_hat(const BoundaryModel& model, const std::vector<Mupo>& mupos,
                                      const BigFloat& rho) {
    SurvivalPrediction p;
    p.island_measure = island_measure(model);
    p.ergodic_measure = 1.0 - p.island_measure;
    p.escape_rate = escape_rate(model);
    p.C = hat_C(model, mupos, rho);
    p.source = PredictionSource::HatMupos;
    return p;
}

/// e^{-gamma t} + C/t.
inline double predict_Pe(const SurvivalPrediction& p, double t) {
    return std::exp(-p.escape_rate * t) + p.C / t;
}

}  // namespace mupolab
