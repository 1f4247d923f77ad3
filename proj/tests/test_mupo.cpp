#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "mupolab/mupo.hpp"

using namespace mupolab;

namespace {

std::set<std::pair<long long, long long>> orbit_set(const std::vector<Mupo>& v) {
    std::set<std::pair<long long, long long>> out;
    for (const auto& m : v) out.insert({m.s, m.j});
    return out;
}

const QuadraticSurd kXi(10, 2, 23, 2);           // 2 theta*
const QuadraticSurd kTheta(5, 1, 23, 2);         // theta*
const QuadraticSurd kSticky(871, 0, 2500, 0);      // theta* = 0.3484

}  // namespace

TEST(Enumerate, Rho0815) {
    using P = std::pair<long long, long long>;
    EXPECT_EQ(orbit_set(enumerate_mupos(0.815, 919)), (std::set<P>{{4, 1}, {5, 1}, {66, 13}}));
    const auto more = orbit_set(enumerate_mupos(0.815, 920));
    EXPECT_EQ(more.size(), 4u);
    EXPECT_TRUE(more.count({920, 181}));
}

TEST(Enumerate, TriangleAtRho055) {
    const auto v = enumerate_mupos(0.55, 3);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].s, 3);
    EXPECT_EQ(v[0].j, 1);
    EXPECT_EQ(v[0].lambda, 2);
    EXPECT_NEAR(v[0].alpha_sj, 0.5, 1e-15);
    EXPECT_NEAR(v[0].beta_sj, 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(Enumerate, ExactThetaStarIncludesBorderOrbit) {
    // With theta* = 871/2500 exactly, cos(871 pi/2500) = rho, so (2500, 871)
    // sits on the closed left endpoint.
    const auto v = enumerate_mupos(RhoInput::from_theta_star(kSticky), 5000);
    using P = std::pair<long long, long long>;
    EXPECT_EQ(orbit_set(v), (std::set<P>{{20, 7}, {66, 23}, {376, 131}, {2500, 871}}));
    for (const auto& m : v) EXPECT_EQ(m.on_border, m.s == 2500);
    EXPECT_EQ(orbit_set(enumerate_mupos(RhoInput::from_theta_star(kSticky), 2499)),
              (std::set<P>{{20, 7}, {66, 23}, {376, 131}}));
}

TEST(Enumerate, InvariantsHold) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int trial = 0; trial < 20; ++trial) {
        const double rho = u(rng);
        const auto v = enumerate_mupos(rho, 400);
        for (const auto& m : v) {
            EXPECT_EQ(std::gcd(m.s, m.j), 1);
            EXPECT_EQ(m.lambda, m.s % 2 == 0 ? 1 : 2);
            EXPECT_LE(m.j, m.s % 2 == 0 ? m.s / 2 - 1 : (m.s - 1) / 2);
            EXPECT_LE(m.alpha_sj, rho);
            EXPECT_LT(rho, m.beta_sj);
            const double scaled = static_cast<double>(m.s * m.s) * (m.beta_sj - m.alpha_sj);
            EXPECT_GT(scaled, 0.1);
            EXPECT_LT(scaled, 40.0);
        }
        EXPECT_TRUE(std::is_sorted(v.begin(), v.end(), [](const Mupo& a, const Mupo& b) {
            return a.s != b.s ? a.s < b.s : a.j < b.j;
        }));
    }
}

TEST(Enumerate, GeneralizedMatchesUnfolding) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    for (int trial = 0; trial < 20; ++trial) {
        const double rho = u(rng);
        std::set<std::pair<long long, long long>> via_gen;
        for (const auto& g : enumerate_mupos_generalized(rho, 0.5, 500)) via_gen.insert(to_orbit(g));
        auto direct = orbit_set(enumerate_mupos(rho, 1000));
        std::erase_if(direct, [](const auto& sj) { return sj.first * (sj.first % 2 == 0 ? 1 : 2) / 2 > 500; });
        EXPECT_EQ(via_gen, direct) << "rho = " << rho;
    }
}

TEST(Enumerate, GeneralizedAgreesWithOneSidedOracle) {
    // (p, q) solves the existence inequality iff q^2 (p/q - xi) is below the exact tolerance.
    for (double alpha : {0.5, 0.3}) {
        for (double rho : {0.3, 0.55, 0.7}) {
            const RhoInput in = RhoInput::from_rho(rho);
            const auto gen = enumerate_mupos_generalized(in, Rational(alpha), 150);
            std::set<std::pair<long long, long long>> got;
            for (const auto& g : gen) got.insert({g.p, g.q});
            const BigFloat a = BigFloat(Rational(alpha));
            const BigFloat xi = in.theta_star_value() / a;
            std::set<std::pair<long long, long long>> want;
            for (long long q = 1; q <= 150; ++q) {
                for (long long p = static_cast<long long>(boost::multiprecision::ceil(xi * q)); alpha * p / q < 0.5; ++p) {
                    const BigFloat gap = BigFloat(q) * BigFloat(q) * (BigFloat(p) / q - xi);
                    if (gap > 2) break;
                    if (std::gcd(p, q) == 1 && gap < exact_tolerance(a, p, q)) want.insert({p, q});
                }
            }
            EXPECT_EQ(got, want) << "alpha " << alpha << " rho " << rho;
        }
    }
}

TEST(Enumerate, ClosedLeftEndpoint) {
    // rho exactly cos(pi/3) = 1/2 via theta* = 1/3.
    const auto v = enumerate_mupos_generalized(RhoInput::from_theta_star(QuadraticSurd::rational(1, 3)),
                                               Rational(1, 2), 3);
    ASSERT_FALSE(v.empty());
    EXPECT_EQ(v[0].p, 2);
    EXPECT_EQ(v[0].q, 3);
    EXPECT_TRUE(v[0].on_border);
}

TEST(Enumerate, WorkedSurdIsEmptyUpTo95) {
    EXPECT_TRUE(enumerate_mupos_generalized(RhoInput::from_theta_star(kTheta), Rational(1, 2), 95).empty());
}

TEST(KBound, LimitAtOneOverRootTwo) {
    const double rho = 1.0 / std::sqrt(2.0);
    const double pi = std::numbers::pi;
    for (double Q : {50.0, 200.0, 1000.0}) {
        const double K = k_bound(rho, 0.5, Q, Q);
        EXPECT_NEAR(K, pi / 4 + 7 * pi * pi / (12 * Q * Q), 60.0 / (Q * Q * Q * Q));
    }
}

TEST(KBound, WorkedExampleBelowThreshold) {
    const double rho = std::cos((5 + std::sqrt(2.0)) * std::numbers::pi / 23);
    EXPECT_LT(k_bound(rho, 0.5, 95.0, 95.0), 0.6549);
    double prev = 1e9;
    for (double q = 95; q < 5000; q *= 1.3) {
        const double K = k_bound(rho, 0.5, q, 95.0);
        EXPECT_LE(K, prev);
        prev = K;
    }
}

TEST(KBound, Preconditions) {
    EXPECT_THROW(k_bound(0.9, 0.5, 3.0, 3.0), Error);
    EXPECT_THROW(k_bound(0.5, 0.5, 10.0, 20.0), Error);
}

TEST(KBound, RemainderBoundHolds) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ur(0.05, 0.9), ua(0.1, 0.5);
    int checked = 0;
    while (checked < 300) {
        const double rho = ur(rng), alpha = ua(rng);
        const double qmin = k_bound_min_Q(rho, alpha);
        const long long Q = static_cast<long long>(std::ceil(qmin)) + 1 + static_cast<long long>(rng() % 40);
        const long long q = Q + static_cast<long long>(rng() % (9 * Q + 1));
        const BigFloat a(alpha);
        const BigFloat xi = boost::multiprecision::acos(BigFloat(rho)) / (a * bf_pi());
        const long long p = static_cast<long long>(boost::multiprecision::ceil(xi * q));
        if (alpha * (p + 1) / q >= 0.5) continue;
        double bound;
        try {
            bound = remainder_bound<double>(rho, alpha, static_cast<double>(q), static_cast<double>(Q));
        } catch (const Error&) {
            continue;
        }
        const double rem = static_cast<double>(abs(true_remainder(a, p, q)));
        EXPECT_LE(rem, bound) << "rho " << rho << " alpha " << alpha << " q " << q << " Q " << Q;
        ++checked;
    }
}

TEST(Convergents, WorkedKValues) {
    const auto cf = expand(kXi);
    const double K5 = odd_convergent_K(cf, 5).to_double();
    const double Kbar5 = intermediate_K(cf, 5, 1).to_double();
    EXPECT_NEAR(K5, 0.706, 5e-4);
    EXPECT_NEAR(Kbar5, 1.237, 5e-4);
    for (std::size_t n = 5; n < 30; n += 2) {
        const double Kn = odd_convergent_K(cf, n).to_double();
        EXPECT_GE(Kn, K5 - 1e-15);
        EXPECT_LE(Kn, 1.0 / std::sqrt(2.0) + 1e-12);
        for (long long c = 1; BigInt(c) < cf.a(n + 2); ++c) {
            const double Kb = intermediate_K(cf, n, c).to_double();
            EXPECT_GE(Kb, Kbar5 - 1e-15);
            EXPECT_LE(Kb, (4.0 + 4.0 * c - c * c) / (4.0 * std::sqrt(2.0)) + 1e-12);
        }
    }
}

TEST(Convergents, KMatchesDirectEvaluation) {
    const auto cf = expand(kXi);
    const auto conv = convergents(cf, 25);
    for (std::size_t n = 1; n < 22; n += 2) {
        const QuadraticSurd B = QuadraticSurd::rational(conv[n].den);
        const QuadraticSurd direct = B * B * (QuadraticSurd::rational(conv[n].num, conv[n].den) - kXi);
        EXPECT_EQ(odd_convergent_K(cf, n), direct);
        for (long long c = 1; BigInt(c) < cf.a(n + 2); ++c) {
            const BigInt num = c * conv[n + 1].num + conv[n].num;
            const BigInt den = c * conv[n + 1].den + conv[n].den;
            const QuadraticSurd D = QuadraticSurd::rational(den);
            EXPECT_EQ(intermediate_K(cf, n, c), D * D * (QuadraticSurd::rational(num, den) - kXi));
        }
    }
}

TEST(Convergents, FamilyK1) {
    for (int m : {2, 5, 12}) {
        const auto cf = make_cf({0, 1}, {1, m});
        // 2m / (3m + sqrt(m(4 + m)))
        const QuadraticSurd want = QuadraticSurd(2 * m) / QuadraticSurd(3 * m, 1, 1, m * (4 + m));
        EXPECT_EQ(odd_convergent_K(cf, 1), want) << "m = " << m;
    }
}

TEST(Convergents, InvalidC) {
    const auto cf = expand(kXi);
    EXPECT_THROW(intermediate_K(cf, 3, 4), Error);
    EXPECT_THROW(intermediate_K(cf, 3, 0), Error);
    EXPECT_THROW(odd_convergent_K(cf, 4), Error);
}

TEST(Sufficient, Threshold) {
    EXPECT_NEAR(sufficient_condition_threshold(0.5, 1.0), 0.390683, 5e-7);
}

TEST(Sufficient, WorkedSurdIsAboveThreshold) {
    // Even positions of [0; 1, 1, 3, {1, 4}] all hold 1, but rho exceeds the wp = 1 threshold.
    const auto cf = expand(kXi);
    EXPECT_EQ(max_even_quotient(cf), 1);
    EXPECT_GT(RhoInput::from_theta_star(kTheta).value(), sufficient_condition_threshold(0.5, 1.0));
    EXPECT_FALSE(mupo_free_sufficient(cf, RhoInput::from_theta_star(kTheta), Rational(1, 2), 95));
}

TEST(Sufficient, LargeQuotientDefeatsBound) {
    const auto cf = make_cf({0, 3, 1000000}, {1, 2});
    EXPECT_FALSE(mupo_free_sufficient(cf, RhoInput::from_rho(0.2), Rational(1, 2), 20));
}

TEST(Sufficient, TruncatedExpansionCannotCertify) {
    EXPECT_THROW(max_even_quotient(expand_inexact(0.3L)), Error);
}

TEST(Sufficient, SoundOnGrid) {
    // xi = [1; {b, 1}] has every even quotient equal to 1; with alpha = 1/4
    // these land below the wp = 1 threshold.
    const Rational alpha(1, 4);
    const double threshold = sufficient_condition_threshold(0.25, 1.0);
    int certified = 0;
    for (int b : {3, 4, 5, 6, 8}) {
        const auto cf = make_cf({1}, {BigInt(b), 1});
        const QuadraticSurd theta = QuadraticSurd::rational(alpha) * cf_value(cf);
        const RhoInput in = RhoInput::from_theta_star(theta);
        ASSERT_LT(in.value(), threshold);
        const long long Q = static_cast<long long>(std::ceil(k_bound_min_Q(in.value(), 0.25))) + 20;
        if (mupo_free_sufficient(cf, in, alpha, Q)) {
            ++certified;
            EXPECT_TRUE(enumerate_mupos_generalized(in, alpha, 10000).empty()) << "b = " << b;
        }
    }
    EXPECT_GT(certified, 0);
}

TEST(Classify, WorkedSurdIsMupoFree) {
    const auto c = classify(kXi, Rational(1, 2), 95);
    EXPECT_EQ(c.kind, StickinessKind::MupoFreeCertified);
    EXPECT_EQ(c.certificate, Certificate::ConvergentBounds);
    EXPECT_TRUE(c.found.empty());
}

TEST(Classify, RationalIsFinitelySticky) {
    const auto c = classify(QuadraticSurd(2) * kSticky, Rational(1, 2), 20);
    EXPECT_EQ(c.kind, StickinessKind::FinitelySticky);
    EXPECT_EQ(c.certificate, Certificate::RationalBound);
    using P = std::pair<long long, long long>;
    EXPECT_EQ(orbit_set(c.orbits), (std::set<P>{{20, 7}, {66, 23}, {376, 131}, {2500, 871}}));
}

TEST(Classify, LargeRhoIsInfinitelySticky) {
    // theta* = (sqrt 2 - 1)/4 gives rho = cos(0.1036 pi) ~ 0.948.
    const QuadraticSurd theta(-1, 1, 4, 2);
    const auto c = classify(QuadraticSurd(2) * theta, Rational(1, 2), 20);
    EXPECT_EQ(c.kind, StickinessKind::InfinitelySticky);
    EXPECT_GT(std::cos(std::numbers::pi * theta.to_double()), 4.0 / std::sqrt(16.0 + std::numbers::pi * std::numbers::pi));
}
