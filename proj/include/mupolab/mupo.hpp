#pragma once

/// @file mupo.hpp
/// @brief Marginally unstable periodic orbits: enumeration, tolerance bound
///        K(q, Q) and stickiness classification.

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "contfrac.hpp"

namespace mupolab {

inline BigFloat bf_pi() { return boost::math::constants::pi<BigFloat>(); }

/// The control parameter, either as a plain number or through an exact
/// theta* = arccos(rho) / pi.
struct RhoInput {
    BigFloat rho;
    std::optional<QuadraticSurd> theta_star;

    static RhoInput from_rho(double r) {
        if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::DomainError, "rho must lie in (0, 1)");
        return {BigFloat(r), std::nullopt};
    }
    static RhoInput from_theta_star(const QuadraticSurd& t) {
        const BigFloat tv = t.to_bigfloat();
        if (!(tv > 0 && tv < 0.5)) throw Error(ErrorCode::DomainError, "theta* must lie in (0, 1/2)");
        return {boost::multiprecision::cos(bf_pi() * tv), t};
    }

    double value() const { return static_cast<double>(rho); }
    BigFloat theta_star_value() const {
        return theta_star ? theta_star->to_bigfloat() : BigFloat(boost::multiprecision::acos(rho) / bf_pi());
    }
};

struct Mupo {
    long long s = 0;
    long long j = 0;
    int lambda = 1;
    double alpha_sj = 0.0;
    double beta_sj = 0.0;
    double theta_sj = 0.0;
    double margin_lo = 0.0;  ///< rho - alpha_sj
    double margin_hi = 0.0;  ///< beta_sj - rho
    bool on_border = false;  ///< alpha_sj == rho: the orbit touches the island
    bool certain = true;     ///< false if a margin vanished at 50 digits

    friend bool operator==(const Mupo& a, const Mupo& b) { return a.s == b.s && a.j == b.j; }
};

/// Solution (p, q) of the generalised existence inequality.
struct GenMupo {
    long long p = 0;
    long long q = 0;
    double margin_lo = 0.0;
    double margin_hi = 0.0;
    bool on_border = false;
    bool certain = true;

    friend bool operator==(const GenMupo& a, const GenMupo& b) { return a.p == b.p && a.q == b.q; }
};

namespace detail {

inline constexpr long double escalate_below = 1e-15L;
inline const BigFloat undecided_below("1e-45");

struct Verdict {
    bool holds;
    BigFloat margin;
    bool certain;
};

/// cos(x pi) <= rho, decided from rational x = num/den.
inline Verdict lower_test(const RhoInput& in, long long num, long long den, const Rational& scale) {
    const Rational x = scale * Rational(num, den);
    const long double xl = static_cast<long double>(static_cast<double>(x));
    const long double c = std::cos(xl * std::numbers::pi_v<long double>);
    const long double rl = static_cast<long double>(in.rho);
    long double m = rl - c;
    BigFloat mb = BigFloat(static_cast<double>(m));
    if (std::abs(m) >= escalate_below && !in.theta_star) return {m >= 0, mb, true};
    if (in.theta_star) {
        // cos is decreasing on [0, pi]: cos(x pi) <= rho  <=>  x >= theta*.
        const int s = (QuadraticSurd::rational(x) - *in.theta_star).sign();
        mb = in.rho - boost::multiprecision::cos(bf_pi() * BigFloat(x));
        if (s == 0) mb = 0;
        return {s >= 0, mb, true};
    }
    mb = in.rho - boost::multiprecision::cos(bf_pi() * BigFloat(x));
    return {mb >= 0, mb, abs(mb) > undecided_below};
}

/// rho < cos(x pi) / cos(y pi).
inline Verdict upper_test(const RhoInput& in, const Rational& x, const Rational& y) {
    const long double pi = std::numbers::pi_v<long double>;
    const long double xl = static_cast<long double>(static_cast<double>(x));
    const long double yl = static_cast<long double>(static_cast<double>(y));
    const long double b = std::cos(xl * pi) / std::cos(yl * pi);
    const long double m = b - static_cast<long double>(in.rho);
    if (std::abs(m) >= escalate_below) return {m > 0, BigFloat(static_cast<double>(m)), true};
    const BigFloat bb = boost::multiprecision::cos(bf_pi() * BigFloat(x)) /
                        boost::multiprecision::cos(bf_pi() * BigFloat(y));
    const BigFloat mb = bb - in.rho;
    return {mb > 0, mb, abs(mb) > undecided_below};
}

}  // namespace detail

/// The orbit (s, j) if it satisfies cos(j pi/s) <= rho < cos(j pi/s) / cos(pi/(lambda s)).
/// `above` reports whether the upper inequality held, so callers scanning j
/// upwards can stop early.
inline std::optional<Mupo> test_mupo(const RhoInput& in, long long s, long long j, bool* above = nullptr) {
    const int lambda = s % 2 == 0 ? 1 : 2;
    const auto up = detail::upper_test(in, Rational(j, s), Rational(1, lambda * s));
    if (above) *above = up.holds || !up.certain;
    if (!up.holds && up.certain) return std::nullopt;
    const auto lo = detail::lower_test(in, j, s, Rational(1));
    if (!lo.holds || std::gcd(s, j) != 1) return std::nullopt;
    Mupo m;
    m.s = s;
    m.j = j;
    m.lambda = lambda;
    m.alpha_sj = std::cos(std::numbers::pi * static_cast<double>(j) / static_cast<double>(s));
    m.beta_sj = m.alpha_sj / std::cos(std::numbers::pi / (lambda * static_cast<double>(s)));
    m.theta_sj = std::numbers::pi / 2 - std::numbers::pi * static_cast<double>(j) / static_cast<double>(s);
    m.margin_lo = static_cast<double>(lo.margin);
    m.margin_hi = static_cast<double>(up.margin);
    m.on_border = lo.margin == 0;
    m.certain = lo.certain && up.certain;
    return m;
}

/// All (s, j) with cos(j pi/s) <= rho < cos(j pi/s) / cos(pi/(lambda s)),
/// gcd(s, j) = 1 and j in the admissible range, for 3 <= s <= s_max.
inline std::vector<Mupo> enumerate_mupos(const RhoInput& in, int s_max) {
    std::vector<Mupo> out;
    const long double th = static_cast<long double>(in.theta_star_value());
    for (int s = 3; s <= s_max; ++s) {
        const int j_max = s % 2 == 0 ? s / 2 - 1 : (s - 1) / 2;
        const int j0 = std::max(1, static_cast<int>(std::floor(th * s)) - 1);
        for (int j = j0; j <= j_max; ++j) {
            bool above = true;
            auto m = test_mupo(in, s, j, &above);
            if (!above) break;
            if (m) out.push_back(*m);
        }
    }
    return out;
}

inline std::vector<Mupo> enumerate_mupos(double rho, int s_max) {
    return enumerate_mupos(RhoInput::from_rho(rho), s_max);
}

/// Coprime (p, q), q <= q_max, with
/// cos(alpha p pi/q) <= rho < cos(alpha p pi/q) / cos(alpha pi/q).
inline std::vector<GenMupo> enumerate_mupos_generalized(const RhoInput& in, const Rational& alpha,
                                                        long long q_max) {
    std::vector<GenMupo> out;
    const long double xi =
        static_cast<long double>(in.theta_star_value() / BigFloat(alpha));
    const double a = static_cast<double>(alpha);
    for (long long q = 1; q <= q_max; ++q) {
        const long long p0 = std::max<long long>(1, static_cast<long long>(std::floor(xi * q)) - 1);
        for (long long p = p0;; ++p) {
            if (a * static_cast<double>(p) / static_cast<double>(q) >= 0.5) break;
            const auto up = detail::upper_test(in, alpha * Rational(p, q), alpha * Rational(1, q));
            if (!up.holds && up.certain) break;
            const auto lo = detail::lower_test(in, p, q, alpha);
            if (!lo.holds || std::gcd(p, q) != 1) continue;
            GenMupo g;
            g.p = p;
            g.q = q;
            g.margin_lo = static_cast<double>(lo.margin);
            g.margin_hi = static_cast<double>(up.margin);
            g.on_border = lo.margin == 0;
            g.certain = lo.certain && up.certain;
            out.push_back(g);
        }
    }
    return out;
}

inline std::vector<GenMupo> enumerate_mupos_generalized(double rho, double alpha, long long q_max) {
    return enumerate_mupos_generalized(RhoInput::from_rho(rho), Rational(alpha), q_max);
}

/// Map a semicircular-hat solution (p, q) to its orbit (s, j).
inline std::pair<long long, long long> to_orbit(const GenMupo& g) {
    if (g.p % 2 == 0) return {g.q, g.p / 2};
    return {2 * g.q, g.p};
}

/// Smallest admissible Q for the remainder bound.
template <typename T>
T k_bound_min_Q(T rho, T alpha) {
    using std::cos;
    using std::max;
    using std::sqrt;
    const T pi = boost::math::constants::pi<T>();
    return max(T(alpha * pi), T(alpha * pi / cos(T(1)) * sqrt(rho / (1 - rho))));
}

/// Leading tolerance alpha pi rho / (2 sqrt(1 - rho^2)).
template <typename T>
T k_leading(T rho, T alpha) {
    using std::sqrt;
    return alpha * boost::math::constants::pi<T>() * rho / (2 * sqrt(1 - rho * rho));
}

/// Remainder bound R2hat(q, Q).
template <typename T>
T remainder_bound(T rho, T alpha, T q, T Q) {
    using std::cos;
    using std::pow;
    using std::sqrt;
    using std::tan;
    const T pi = boost::math::constants::pi<T>();
    const T ap = alpha * pi;
    const T cq = cos(ap / Q);
    const T c2 = cq * cq;
    const T s = sqrt(1 - rho * rho);
    const T inner = 1 - rho * rho * pow(1 + ap * ap / (c2 * q * q), 2);
    if (!(inner > 0)) throw Error(ErrorCode::DomainError, "remainder bound undefined for this q");
    const T br = (tan(ap / Q) * tan(ap / Q) + T(4) / 3) * rho / s + rho * rho * rho / (2 * s * s * s) +
                 (1 + ap * ap / (c2 * Q * Q)) * rho * rho * rho / (2 * c2 * inner * sqrt(inner));
    return ap * ap / (c2 * q * q) * br;
}

/// K(q, Q) = alpha pi rho / (2 sqrt(1 - rho^2)) + R2hat(q, Q).
template <typename T>
T k_bound(T rho, T alpha, T q, T Q) {
    if (!(Q > k_bound_min_Q(rho, alpha)))
        throw Error(ErrorCode::DomainError, "Q below the admissible minimum");
    if (q < Q) throw Error(ErrorCode::DomainError, "k_bound needs q >= Q");
    return k_leading(rho, alpha) + remainder_bound(rho, alpha, q, Q);
}

inline double k_bound(double rho, double alpha, double q, double Q) { return k_bound<double>(rho, alpha, q, Q); }

/// Exact tolerance q^2 (p/q - arccos(cos(a p pi/q) / cos(a pi/q)) / (a pi)):
/// (p, q) satisfies the existence inequality iff q^2 (p/q - xi) is below it.
inline BigFloat exact_tolerance(const BigFloat& alpha, long long p, long long q) {
    using boost::multiprecision::acos;
    using boost::multiprecision::cos;
    const BigFloat pi = bf_pi();
    const BigFloat qq = BigFloat(q);
    const BigFloat c = cos(alpha * BigFloat(p) * pi / qq) / cos(alpha * pi / qq);
    return qq * qq * (BigFloat(p) / qq - acos(c) / (alpha * pi));
}

/// Remainder R2(q) of the second-order expansion of the exact tolerance.
inline BigFloat true_remainder(const BigFloat& alpha, long long p, long long q) {
    using boost::multiprecision::tan;
    const BigFloat ap = alpha * bf_pi();
    return exact_tolerance(alpha, p, q) - ap / (2 * tan(ap * BigFloat(p) / BigFloat(q)));
}

/// K_n = (zeta_{n+1} + B_{n-1}/B_n)^{-1} for odd n.
inline QuadraticSurd odd_convergent_K(const ContinuedFraction& cf, std::size_t n) {
    if (n % 2 == 0) throw Error(ErrorCode::DomainError, "odd_convergent_K needs odd n");
    const auto conv = convergents(cf, n);
    const QuadraticSurd z = complete_quotient(cf, n + 1);
    return (z + QuadraticSurd::rational(conv[n - 1].den, conv[n].den)).reciprocal();
}

/// Kbar_n(c) = (zeta_{n+2} - c)(c + B_n/B_{n+1}) / (zeta_{n+2} + B_n/B_{n+1}).
inline QuadraticSurd intermediate_K(const ContinuedFraction& cf, std::size_t n, long long c) {
    if (n % 2 == 0) throw Error(ErrorCode::DomainError, "intermediate_K needs odd n");
    if (c < 1 || BigInt(c) >= cf.a(n + 2)) throw Error(ErrorCode::InvalidC, "require 1 <= c < a_{n+2}");
    const auto conv = convergents(cf, n + 1);
    const QuadraticSurd z = complete_quotient(cf, n + 2);
    const QuadraticSurd v = QuadraticSurd::rational(conv[n].den, conv[n + 1].den);
    const QuadraticSurd cc = QuadraticSurd::rational(BigInt(c));
    return (z - cc) * (cc + v) / (z + v);
}

/// Largest even-index partial quotient a_{2n}, n >= 1.
inline BigInt max_even_quotient(const ContinuedFraction& cf) {
    if (cf.tail == CfTail::TruncatedAtDepth)
        throw Error(ErrorCode::UnboundedEvenQuotients, "truncated expansion cannot certify boundedness");
    const std::size_t end =
        cf.tail == CfTail::Periodic ? cf.period_start + 2 * cf.period_length : cf.terms.size();
    BigInt best = 0;
    for (std::size_t i = 2; i < end; i += 2) best = std::max(best, cf.a(i));
    return best;
}

/// rho at which the leading tolerance equals 1/(wp + 2).
inline double sufficient_condition_threshold(double alpha, double wp) {
    const double x = (wp + 2.0) * std::numbers::pi * alpha / 2.0;
    return 1.0 / std::sqrt(x * x + 1.0);
}

/// True if K(Q, Q) < 1/(wp + 2) and no solution exists for q <= Q.
inline bool mupo_free_sufficient(const ContinuedFraction& xi_cf, const RhoInput& rho, const Rational& alpha,
                                 long long Q) {
    const BigInt wp = max_even_quotient(xi_cf);
    const BigFloat r = rho.rho;
    const BigFloat a = BigFloat(alpha);
    const BigFloat K = k_bound<BigFloat>(r, a, BigFloat(Q), BigFloat(Q));
    if (!(K < BigFloat(1) / BigFloat(wp + 2))) return false;
    return enumerate_mupos_generalized(rho, alpha, Q).empty();
}

enum class StickinessKind { MupoFreeCertified, FinitelySticky, InfinitelySticky, UndecidedUpTo };

inline const char* to_string(StickinessKind k) {
    switch (k) {
    case StickinessKind::MupoFreeCertified: return "MupoFreeCertified";
    case StickinessKind::FinitelySticky: return "FinitelySticky";
    case StickinessKind::InfinitelySticky: return "InfinitelySticky";
    case StickinessKind::UndecidedUpTo: return "UndecidedUpTo";
    }
    return "unknown";
}

enum class Certificate { None, EvenQuotientBound, ConvergentBounds, RationalBound, LeadingToleranceAboveOne };

inline const char* to_string(Certificate c) {
    switch (c) {
    case Certificate::None: return "none";
    case Certificate::EvenQuotientBound: return "even_quotient_bound";
    case Certificate::ConvergentBounds: return "convergent_bounds";
    case Certificate::RationalBound: return "rational_bound";
    case Certificate::LeadingToleranceAboveOne: return "leading_tolerance_above_one";
    }
    return "unknown";
}

struct StickinessClass {
    StickinessKind kind = StickinessKind::UndecidedUpTo;
    long long checked_to = 0;
    Certificate certificate = Certificate::None;
    std::vector<GenMupo> found;
    std::vector<Mupo> orbits;  ///< (s, j) form, semicircular hats only
    std::string witness;
};

namespace detail {

/// Bounds on x = [0; b1, b2, ...] from its first `terms` partial quotients.
/// An odd count gives an upper bound, an even count a lower bound.
inline QuadraticSurd reversed_bound(const ContinuedFraction& cf, std::size_t n, std::size_t terms) {
    QuadraticSurd x = QuadraticSurd::rational(cf.a(n + 1 - terms));
    for (std::size_t i = terms - 1; i >= 1; --i) x = QuadraticSurd::rational(cf.a(n + 1 - i)) + x.reciprocal();
    return x.reciprocal();
}

}  // namespace detail

/// Classify xi = theta*/alpha.
inline StickinessClass classify(const QuadraticSurd& xi, const Rational& alpha, long long Q) {
    StickinessClass out;
    const QuadraticSurd theta = QuadraticSurd::rational(alpha) * xi;
    const RhoInput in = RhoInput::from_theta_star(theta);
    const BigFloat a = BigFloat(alpha);
    const BigFloat rho = in.rho;
    const BigFloat KQ = k_bound<BigFloat>(rho, a, BigFloat(Q), BigFloat(Q));
    const auto finish = [&](std::vector<GenMupo> found) {
        out.found = std::move(found);
        if (alpha == Rational(1, 2)) {
            for (const auto& g : out.found) {
                const auto [s, j] = to_orbit(g);
                for (const auto& m : enumerate_mupos(in, static_cast<int>(s)))
                    if (m.s == s && m.j == j) out.orbits.push_back(m);
            }
            std::sort(out.orbits.begin(), out.orbits.end(),
                      [](const Mupo& x, const Mupo& y) { return x.s != y.s ? x.s < y.s : x.j < y.j; });
        }
    };

    if (xi.is_rational()) {
        // Off xi itself, p/q - xi >= 1/(b q), so solutions need q < b K(Q, Q).
        const BigInt b = xi.m();
        const long long bound =
            std::max<long long>({Q, static_cast<long long>(b), static_cast<long long>(BigFloat(b) * KQ) + 1});
        finish(enumerate_mupos_generalized(in, alpha, bound));
        out.kind = StickinessKind::FinitelySticky;
        out.checked_to = bound;
        out.certificate = Certificate::RationalBound;
        return out;
    }

    const BigFloat kappa = k_leading(rho, a);
    if (kappa > 1) {
        out.kind = StickinessKind::InfinitelySticky;
        out.certificate = Certificate::LeadingToleranceAboveOne;
        out.witness = "leading tolerance " + kappa.str(8) +
                      " exceeds 1 > K_n, so every odd convergent beyond some index is a solution";
        out.checked_to = Q;
        finish(enumerate_mupos_generalized(in, alpha, Q));
        return out;
    }

    auto found = enumerate_mupos_generalized(in, alpha, Q);
    out.checked_to = Q;
    if (KQ >= 1) {
        // Solutions need not be convergents or intermediate fractions here.
        finish(std::move(found));
        out.witness = "K(Q, Q) = " + KQ.str(8) + " >= 1; increase Q";
        return out;
    }
    const ContinuedFraction cf = expand(xi);
    if (cf.tail != CfTail::Periodic) {
        finish(std::move(found));
        out.kind = StickinessKind::UndecidedUpTo;
        return out;
    }

    const auto k_at = [&](const BigInt& q) {
        return k_bound<BigFloat>(rho, a, BigFloat(q), BigFloat(Q));
    };
    // Direct checks until the reversed expansions sit inside the period.
    const std::size_t depth = 7;
    std::size_t n_reg = cf.period_start + depth + 2 * cf.period_length + 1;
    n_reg += 1 - n_reg % 2;  // the bounds below are for odd n
    bool ok = true;
    const auto conv = convergents(cf, n_reg + 2 * cf.period_length + 3);
    for (std::size_t n = 1; n <= n_reg + 2 * cf.period_length && ok; n += 2) {
        if (conv[n].den >= Q && !(odd_convergent_K(cf, n).to_bigfloat() > k_at(conv[n].den))) ok = false;
        for (BigInt c = 1; c < cf.a(n + 2) && ok; ++c) {
            const BigInt den = c * conv[n + 1].den + conv[n].den;
            if (den >= Q && !(intermediate_K(cf, n, static_cast<long long>(c)).to_bigfloat() > k_at(den)))
                ok = false;
        }
    }
    // Beyond that, bound B_{n-1}/B_n by truncated reversed expansions; these
    // depend on n only through n modulo the period.
    for (std::size_t n = n_reg; n < n_reg + 2 * cf.period_length && ok; n += 2) {
        const QuadraticSurd up = detail::reversed_bound(cf, n, depth);
        const QuadraticSurd lo = detail::reversed_bound(cf, n + 1, depth - 1);
        const QuadraticSurd z1 = complete_quotient(cf, n + 1);
        const QuadraticSurd z2 = complete_quotient(cf, n + 2);
        if (!((z1 + up).reciprocal().to_bigfloat() > KQ)) ok = false;
        for (BigInt c = 1; c < cf.a(n + 2) && ok; ++c) {
            const QuadraticSurd cc = QuadraticSurd::rational(c);
            if (!(((z2 - cc) * (cc + lo) / (z2 + lo)).to_bigfloat() > KQ)) ok = false;
        }
    }
    finish(std::move(found));
    if (!ok) {
        out.kind = StickinessKind::UndecidedUpTo;
        return out;
    }
    out.certificate = Certificate::ConvergentBounds;
    out.kind = out.found.empty() ? StickinessKind::MupoFreeCertified : StickinessKind::FinitelySticky;
    return out;
}

}  // namespace mupolab
