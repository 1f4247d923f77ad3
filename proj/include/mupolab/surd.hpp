#pragma once

/// @file surd.hpp
/// @brief Exact quadratic surds (p + q*sqrt(d)) / m over big integers.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <string>

#include "error.hpp"

namespace mupolab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using BigFloat = boost::multiprecision::cpp_bin_float_50;

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) q -= 1;
    return q;
}

inline BigInt isqrt(const BigInt& n) { return boost::multiprecision::sqrt(n); }

inline bool is_square(const BigInt& n) {
    if (n < 0) return false;
    const BigInt s = isqrt(n);
    return s * s == n;
}

class QuadraticSurd {
public:
    QuadraticSurd() = default;
    QuadraticSurd(long long v) : p_(v) {}  // NOLINT: implicit from integers is intended
    QuadraticSurd(BigInt p, BigInt q, BigInt m, BigInt d)
        : p_(std::move(p)), q_(std::move(q)), m_(std::move(m)), d_(std::move(d)) {
        canonicalize();
    }

    static QuadraticSurd rational(const BigInt& num, const BigInt& den = 1) {
        return QuadraticSurd(num, 0, den, 0);
    }
    static QuadraticSurd rational(const Rational& r) {
        return rational(numerator(r), denominator(r));
    }

    const BigInt& p() const { return p_; }
    const BigInt& q() const { return q_; }
    const BigInt& m() const { return m_; }
    const BigInt& d() const { return d_; }
    bool is_rational() const { return q_ == 0; }
    Rational rational_value() const { return Rational(p_, m_); }

    int sign() const {
        const int sp = p_.sign();
        const int sq = q_.sign();
        if (sq == 0) return sp;
        if (sp == 0) return sq;
        if (sp == sq) return sp;
        return p_ * p_ > q_ * q_ * d_ ? sp : sq;
    }

    BigFloat to_bigfloat() const {
        BigFloat v = BigFloat(p_);
        if (q_ != 0) v += BigFloat(q_) * boost::multiprecision::sqrt(BigFloat(d_));
        return v / BigFloat(m_);
    }
    double to_double() const { return static_cast<double>(to_bigfloat()); }

    BigInt floor() const {
        if (q_ == 0) return floor_div(p_, m_);
        const BigInt s = isqrt(q_ * q_ * d_);
        BigInt f = q_ > 0 ? floor_div(p_ + s, m_) : floor_div(p_ - s - 1, m_);
        while ((*this - rational(BigInt(f + 1))).sign() >= 0) f += 1;
        while ((*this - rational(f)).sign() < 0) f -= 1;
        return f;
    }
    BigInt ceil() const { return -(-*this).floor(); }

    QuadraticSurd operator-() const { return QuadraticSurd(-p_, -q_, m_, d_); }

    friend QuadraticSurd operator+(const QuadraticSurd& a, const QuadraticSurd& b) {
        const BigInt d = common_d(a, b);
        return QuadraticSurd(a.p_ * b.m_ + b.p_ * a.m_, a.q_ * b.m_ + b.q_ * a.m_, a.m_ * b.m_, d);
    }
    friend QuadraticSurd operator-(const QuadraticSurd& a, const QuadraticSurd& b) { return a + (-b); }
    friend QuadraticSurd operator*(const QuadraticSurd& a, const QuadraticSurd& b) {
        const BigInt d = common_d(a, b);
        return QuadraticSurd(a.p_ * b.p_ + a.q_ * b.q_ * d, a.p_ * b.q_ + a.q_ * b.p_, a.m_ * b.m_, d);
    }
    QuadraticSurd reciprocal() const {
        const BigInt norm = p_ * p_ - q_ * q_ * d_;
        if (norm == 0) throw Error(ErrorCode::DomainError, "reciprocal of zero");
        return QuadraticSurd(m_ * p_, -m_ * q_, norm, d_);
    }
    friend QuadraticSurd operator/(const QuadraticSurd& a, const QuadraticSurd& b) {
        return a * b.reciprocal();
    }

    friend bool operator==(const QuadraticSurd& a, const QuadraticSurd& b) {
        return a.p_ == b.p_ && a.q_ == b.q_ && a.m_ == b.m_ && a.d_ == b.d_;
    }
    friend std::strong_ordering operator<=>(const QuadraticSurd& a, const QuadraticSurd& b) {
        const int s = (a - b).sign();
        return s < 0 ? std::strong_ordering::less
                     : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    std::string to_string() const {
        std::string s = "(" + p_.str();
        if (q_ != 0) s += (q_ > 0 ? " + " : " - ") + BigInt(abs(q_)).str() + "*sqrt(" + d_.str() + ")";
        return s + ")/" + m_.str();
    }

private:
    static BigInt common_d(const QuadraticSurd& a, const QuadraticSurd& b) {
        if (a.q_ == 0) return b.d_;
        if (b.q_ == 0 || a.d_ == b.d_) return a.d_;
        throw Error(ErrorCode::DomainError, "surds over different quadratic fields");
    }

    void canonicalize() {
        if (m_ == 0) throw Error(ErrorCode::DomainError, "zero denominator");
        if (d_ < 0) throw Error(ErrorCode::DomainError, "negative radicand");
        if (q_ != 0 && d_ != 0) {
            const BigInt s = isqrt(d_);
            if (s * s == d_) {
                p_ += q_ * s;
                q_ = 0;
            } else if (d_ < BigInt(1) << 40) {
                // Pull square factors out of d so equal fields compare equal.
                long long dd = static_cast<long long>(d_);
                long long out = 1;
                for (long long f = 2; f * f <= dd; ++f)
                    while (dd % (f * f) == 0) {
                        dd /= f * f;
                        out *= f;
                    }
                d_ = dd;
                q_ *= out;
            }
        }
        if (q_ == 0 || d_ == 0) {
            q_ = 0;
            d_ = 0;
        }
        if (m_ < 0) {
            p_ = -p_;
            q_ = -q_;
            m_ = -m_;
        }
        BigInt g = gcd(gcd(abs(p_), abs(q_)), m_);
        if (g > 1) {
            p_ /= g;
            q_ /= g;
            m_ /= g;
        }
    }

    BigInt p_ = 0;
    BigInt q_ = 0;
    BigInt m_ = 1;
    BigInt d_ = 0;
};

}  // namespace mupolab
