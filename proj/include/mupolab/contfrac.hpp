#pragma once

/// @file contfrac.hpp
/// @brief Continued fractions of rationals and quadratic surds.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "surd.hpp"

namespace mupolab {

enum class CfTail { Terminated, Periodic, TruncatedAtDepth };

inline const char* to_string(CfTail t) {
    switch (t) {
    case CfTail::Terminated: return "terminated";
    case CfTail::Periodic: return "periodic";
    case CfTail::TruncatedAtDepth: return "truncated";
    }
    return "unknown";
}

struct Fraction {
    BigInt num;
    BigInt den;

    Rational value() const { return Rational(num, den); }
    double to_double() const { return static_cast<double>(value()); }
    friend bool operator==(const Fraction&, const Fraction&) = default;
};

/// Partial quotients a_0, a_1, ... stored up to the end of the first period.
/// For periodic tails the block [period_start, period_start + period_length)
/// repeats forever; period_start is always >= 1.
struct ContinuedFraction {
    std::vector<BigInt> terms;
    std::size_t period_start = 0;
    std::size_t period_length = 0;
    CfTail tail = CfTail::Terminated;
    std::optional<QuadraticSurd> value;

    bool has(std::size_t n) const { return tail == CfTail::Periodic || n < terms.size(); }

    const BigInt& a(std::size_t n) const {
        if (n < terms.size()) return terms[n];
        if (tail != CfTail::Periodic)
            throw Error(ErrorCode::DepthExceeded, "partial quotient " + std::to_string(n) + " unavailable");
        return terms[period_start + (n - period_start) % period_length];
    }

    const BigInt& a0() const { return terms.front(); }

    std::vector<BigInt> pre_period() const {
        const std::size_t end = tail == CfTail::Periodic ? period_start : terms.size();
        return {terms.begin() + 1, terms.begin() + static_cast<std::ptrdiff_t>(end)};
    }

    std::vector<BigInt> period() const {
        if (tail != CfTail::Periodic) return {};
        return {terms.begin() + static_cast<std::ptrdiff_t>(period_start), terms.end()};
    }

    /// Render as "[a0; a1, a2, {p1, p2}]".
    std::string to_string() const {
        std::string s = "[" + terms.front().str();
        const auto pre = pre_period();
        const auto per = period();
        if (pre.empty() && per.empty()) {
            if (tail == CfTail::TruncatedAtDepth) s += "; ...";
            return s + "]";
        }
        s += "; ";
        bool first = true;
        for (const auto& t : pre) {
            s += (first ? "" : ", ") + t.str();
            first = false;
        }
        if (!per.empty()) {
            s += first ? "{" : ", {";
            for (std::size_t i = 0; i < per.size(); ++i) s += (i ? ", " : "") + per[i].str();
            s += "}";
        }
        if (tail == CfTail::TruncatedAtDepth) s += ", ...";
        return s + "]";
    }
};

namespace detail {

/// Normalise a detected cycle so the period starts at index >= 1.
inline void close_period(ContinuedFraction& cf, std::size_t start, std::size_t length) {
    if (start == 0) {
        for (std::size_t i = 0; i < length; ++i) cf.terms.push_back(cf.terms[i]);
        start = length;
    }
    cf.terms.resize(start + length);
    cf.period_start = start;
    cf.period_length = length;
    cf.tail = CfTail::Periodic;
}

}  // namespace detail

/// Exact expansion. Rationals terminate; surds are periodic, detected by the
/// first repeated complete-quotient state (P + sqrt(D)) / Q.
inline ContinuedFraction expand(const QuadraticSurd& x, std::size_t max_depth = 10000) {
    ContinuedFraction cf;
    cf.value = x;
    if (x.is_rational()) {
        BigInt num = x.p();
        BigInt den = x.m();
        while (true) {
            if (cf.terms.size() >= max_depth)
                throw Error(ErrorCode::DepthExceeded, "rational expansion exceeds max_depth");
            const BigInt a = floor_div(num, den);
            cf.terms.push_back(a);
            const BigInt rem = num - a * den;
            if (rem == 0) break;
            num = den;
            den = rem;
        }
        cf.tail = CfTail::Terminated;
        return cf;
    }

    BigInt P = x.q() > 0 ? x.p() : BigInt(-x.p());
    BigInt Q = x.q() > 0 ? x.m() : BigInt(-x.m());
    BigInt D = x.q() * x.q() * x.d();
    if ((D - P * P) % Q != 0) {
        const BigInt aq = abs(Q);
        P *= aq;
        D *= Q * Q;
        Q *= aq;
    }
    const BigInt s = isqrt(D);
    std::map<std::pair<BigInt, BigInt>, std::size_t> seen;
    while (true) {
        auto key = std::make_pair(P, Q);
        if (auto it = seen.find(key); it != seen.end()) {
            detail::close_period(cf, it->second, cf.terms.size() - it->second);
            return cf;
        }
        if (cf.terms.size() >= max_depth)
            throw Error(ErrorCode::DepthExceeded, "no period found within max_depth");
        seen.emplace(std::move(key), cf.terms.size());
        const BigInt a = floor_div(P + s + (Q < 0 ? 1 : 0), Q);
        cf.terms.push_back(a);
        P = a * Q - P;
        Q = (D - P * P) / Q;
    }
}

/// Expansion of a double, treated as inexact: stops once the accumulated
/// residual is no longer meaningful.
inline ContinuedFraction expand_inexact(long double x, std::size_t max_depth = 64) {
    ContinuedFraction cf;
    cf.tail = CfTail::TruncatedAtDepth;
    long double err = std::numeric_limits<long double>::epsilon() * std::max(1.0L, std::abs(x));
    const long double cutoff = 1e3L * std::numeric_limits<long double>::epsilon();
    for (std::size_t n = 0; n < max_depth; ++n) {
        const long double a = std::floor(x);
        cf.terms.push_back(BigInt(static_cast<long long>(a)));
        const long double frac = x - a;
        if (frac <= err || frac < cutoff) break;
        x = 1.0L / frac;
        err = err / (frac * frac) + std::numeric_limits<long double>::epsilon() * x;
        if (err > 1e-3L) break;
    }
    return cf;
}

/// Exact value of a terminated or periodic continued fraction.
inline QuadraticSurd cf_value(const ContinuedFraction& cf) {
    if (cf.value) return *cf.value;
    if (cf.tail == CfTail::TruncatedAtDepth)
        throw Error(ErrorCode::DepthExceeded, "truncated expansion has no exact value");
    std::size_t end = cf.terms.size();
    QuadraticSurd y;
    if (cf.tail == CfTail::Periodic) {
        // Purely periodic tail y = [b0; ..., b_{k-1}, y].
        BigInt p1 = 1, p2 = 0, q1 = 0, q2 = 1;
        for (std::size_t i = cf.period_start; i < end; ++i) {
            const BigInt p = cf.terms[i] * p1 + p2;
            const BigInt q = cf.terms[i] * q1 + q2;
            p2 = p1;
            p1 = p;
            q2 = q1;
            q1 = q;
        }
        const BigInt b = p1 - q2;
        y = QuadraticSurd(b, 1, 2 * q1, b * b + 4 * q1 * p2);
        end = cf.period_start;
    } else {
        y = QuadraticSurd::rational(cf.terms[end - 1]);
        end -= 1;
    }
    for (std::size_t i = end; i-- > 0;) y = QuadraticSurd::rational(cf.terms[i]) + y.reciprocal();
    return y;
}

/// Build a continued fraction from explicit partial quotients.
inline ContinuedFraction make_cf(std::vector<BigInt> pre, std::vector<BigInt> period = {}) {
    ContinuedFraction cf;
    cf.terms = std::move(pre);
    if (cf.terms.empty()) throw Error(ErrorCode::DomainError, "empty continued fraction");
    if (period.empty()) {
        cf.tail = CfTail::Terminated;
    } else {
        const std::size_t start = cf.terms.size();
        for (auto& t : period) cf.terms.push_back(std::move(t));
        cf.period_start = start;
        cf.period_length = cf.terms.size() - start;
        cf.tail = CfTail::Periodic;
    }
    cf.value = cf_value(cf);
    return cf;
}

/// Convergents A_k / B_k for k = 0..n.
inline std::vector<Fraction> convergents(const ContinuedFraction& cf, std::size_t n) {
    std::vector<Fraction> out;
    out.reserve(n + 1);
    BigInt A1 = 1, A2 = 0, B1 = 0, B2 = 1;
    for (std::size_t k = 0; k <= n; ++k) {
        const BigInt& a = cf.a(k);
        BigInt A = a * A1 + A2;
        BigInt B = a * B1 + B2;
        A2 = A1;
        A1 = A;
        B2 = B1;
        B1 = B;
        out.push_back({A, B});
    }
    return out;
}

/// Complete quotient zeta_n = [a_n; a_{n+1}, ...] as an exact surd.
inline QuadraticSurd complete_quotient(const ContinuedFraction& cf, std::size_t n) {
    if (!cf.has(n)) throw Error(ErrorCode::DepthExceeded, "complete quotient beyond expansion");
    QuadraticSurd z = cf_value(cf);
    for (std::size_t k = 0; k < n; ++k) {
        const QuadraticSurd rest = z - QuadraticSurd::rational(cf.a(k));
        if (rest.sign() == 0) throw Error(ErrorCode::DepthExceeded, "expansion terminates before n");
        z = rest.reciprocal();
    }
    return z;
}

/// Intermediate convergents (c A_{n+1} + A_n) / (c B_{n+1} + B_n), 1 <= c < a_{n+2}.
inline std::vector<Fraction> intermediate_convergents(const ContinuedFraction& cf, std::size_t n) {
    const auto conv = convergents(cf, n + 1);
    const BigInt& top = cf.a(n + 2);
    std::vector<Fraction> out;
    for (BigInt c = 1; c < top; ++c) {
        BigInt num = c * conv[n + 1].num + conv[n].num;
        BigInt den = c * conv[n + 1].den + conv[n].den;
        const BigInt g = gcd(num, den);
        out.push_back({num / g, den / g});
    }
    return out;
}

/// All reduced p/q with q <= q_max and 0 <= p/q - xi < K(q, p) / q^2, by
/// exhaustive exact check. The bound is evaluated in 50-digit arithmetic.
inline std::vector<Fraction> one_sided_solutions(
    const QuadraticSurd& xi, const std::function<BigFloat(const BigInt& q, const BigInt& p)>& K,
    long long q_max) {
    std::vector<Fraction> out;
    for (long long qi = 1; qi <= q_max; ++qi) {
        const BigInt q = qi;
        const QuadraticSurd qx = QuadraticSurd::rational(q) * xi;
        for (BigInt p = qx.ceil();; ++p) {
            // q^2 (p/q - xi) = q (p - q xi)
            const QuadraticSurd gap = QuadraticSurd::rational(q) * (QuadraticSurd::rational(p) - qx);
            if (!(gap.to_bigfloat() < K(q, p))) break;
            if (gcd(p, q) == 1) out.push_back({p, q});
        }
    }
    return out;
}

inline std::vector<Fraction> one_sided_solutions(const QuadraticSurd& xi,
                                                 const std::function<double(long long q)>& K,
                                                 long long q_max) {
    return one_sided_solutions(
        xi, [&](const BigInt& q, const BigInt&) { return BigFloat(K(static_cast<long long>(q))); },
        q_max);
}

}  // namespace mupolab
