#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mupolab/montecarlo.hpp"
#include "mupolab/stem.hpp"

using namespace mupolab;

namespace {

const double kRhoMid = std::cos((5 + std::sqrt(2.0)) * std::numbers::pi / 23);

MushroomSpec rect(double rho, double hm, double hp) {
    MushroomSpec s;
    s.stem_half_width = rho;
    s.hole = HoleSpec{HoleWall::RectStemRightWall, hm, hp};
    return s;
}

struct Traced {
    int arc_hits = 0;
    double theta_f = 0.0;    ///< descent angle from the horizontal
    double t_cross = 0.0;    ///< time at which the descent passes height h+
};

/// Launch from the right stem wall at height x, angle theta above the
/// horizontal, and follow the orbit until it comes back down past h+.
Traced trace(const BoundaryModel& m, double x, double theta, double h_plus) {
    const double L = m.spec().stem_length;
    ParticleState st{{m.r(), x - L}, {-std::cos(theta), std::sin(theta)}, 0.0};
    int seg = 4;
    Traced out;
    bool visited_hat = false;
    while (true) {
        const auto r = next_collision(st, m, seg);
        if (r.status != StepStatus::Ok) throw std::runtime_error("corner");
        if (r.state.position.y > 1e-12) visited_hat = true;
        if (r.segment == 0) ++out.arc_hits;
        if (visited_hat && r.state.direction.y < 0.0 && r.state.position.y < 0.0 && out.theta_f == 0.0 &&
            (r.segment == 2 || r.segment == 4))
            out.theta_f = std::atan2(-r.state.direction.y, std::abs(r.state.direction.x));
        const double level = h_plus - L;
        if (visited_hat && r.state.position.y < level) {
            out.t_cross = st.time + (st.position.y - level) / (st.position.y - r.state.position.y) * r.flight_time;
            return out;
        }
        st = r.state;
        seg = r.segment;
    }
}

}  // namespace

TEST(StemCase, DerivedQuantities) {
    const auto c = make_stem_case(0.6, 1.0, 0.1, 0.3);
    EXPECT_EQ(c.zeta, 2);
    EXPECT_FALSE(c.degenerate);
    EXPECT_NEAR(c.u(), 1.4, 1e-15);
    EXPECT_TRUE(make_stem_case(0.5, 1.0, 0.1, 0.3).degenerate);
    EXPECT_EQ(make_stem_case(0.5, 1.0, 0.1, 0.3).zeta, 2);
    EXPECT_EQ(make_stem_case(0.26, 1.0, 0.1, 0.3).zeta, 4);
    EXPECT_THROW(make_stem_case(0.6, 1.0, 0.3, 0.3), Error);
    EXPECT_THROW(make_stem_case(0.6, 1.0, 0.1, 1.0), Error);
}

TEST(Direct, Limits) {
    const auto c0 = make_stem_case(0.6, 1.0, 0.0, 0.3, 1.0, 2.0);
    EXPECT_DOUBLE_EQ(direct_regular_C(c0), 0.49 / 2.0);
    const auto c = make_stem_case(0.6, 1.0, 0.28, 0.3, 1.0, 2.0);
    EXPECT_DOUBLE_EQ(direct_regular_C(c), (4 * 0.28 * 0.28 + 0.49) / 2.0);
    EXPECT_DOUBLE_EQ(direct_regular_C(c, DirectCount::Published), (5 * 0.28 * 0.28 + 0.49) / 2.0);
}

TEST(Direct, MatchesStemOnlySurvivors) {
    // Importance sample near-horizontal launches from both stem walls and keep
    // orbits that reach the hole without ever entering the hat.
    const auto m = build_boundary(rect(kRhoMid, 0.28, 0.3));
    const auto c = make_stem_case(m);
    const double t = 1000.0, cap = 1e5, delta = 0.01;
    const std::uint64_t n = 100'000;
    std::uint64_t hits = 0;
    const auto& segs = m.segments();
    for (std::uint64_t i = 0; i < n; ++i) {
        StreamRng rng(21, i);
        const int wall = rng.uniform() < 0.5 ? 2 : 4;
        const BirkhoffCoord ic{segs[wall].z0 + rng.uniform(0.0, segs[wall].length), rng.uniform(-delta, delta)};
        int seg = -1;
        ParticleState st = from_birkhoff(ic, m, &seg);
        bool hat = false;
        while (true) {
            const auto r = next_collision(st, m, seg);
            if (r.status != StepStatus::Ok) break;
            if (r.state.position.y > 0.0) hat = true;
            if (hat) break;
            if (m.in_hole(r.segment, r.state.position)) {
                hits += r.state.time > t;
                break;
            }
            if (r.state.time > cap) {
                ++hits;
                break;
            }
            st = r.state;
            seg = r.segment;
        }
    }
    const double region = 2.0 * c.L * 2.0 * delta;  // Birkhoff measure sampled
    const double measure = region * static_cast<double>(hits) / static_cast<double>(n) / c.norm;
    EXPECT_NEAR(measure * t / direct_regular_C(c), 1.0, 0.05);
}

TEST(Reflection, WindowLabels) {
    const auto c = make_stem_case(0.6, 1.0, 0.1, 0.3);
    const double d1 = 0.01;
    int last = 0, changes = 0;
    for (int i = 1; i < 600; ++i) {
        const double omega = 0.6 * i / 600.0;
        const double theta = d1 / (2.0 * omega);
        // Start d1 below the hat base so that the orbit enters the hat at once.
        const Reflection r = reflection_outcome(1.0 - d1, theta, c);
        if (r.n != 0) continue;
        const int want = omega < c.omega1() ? 1 : (omega < c.omega2() ? c.zeta + 1 : c.zeta);
        EXPECT_EQ(r.k, want);
        if (r.k != last) ++changes;
        last = r.k;
    }
    EXPECT_EQ(changes, 3);
}

TEST(Reflection, ZetaWindowJustBelowRho) {
    const auto c = make_stem_case(0.6, 1.0, 0.1, 0.3);
    const double d1 = 0.01, omega = 0.599;
    EXPECT_EQ(reflection_outcome(1.0 - d1, d1 / (2 * omega), c).k, c.zeta);
    const auto r = reflection_outcome(1.0 - d1, d1 / (2 * 0.3), c);
    EXPECT_EQ(r.k, 1);
    EXPECT_LT(r.theta_f, 0.0);
}

TEST(Reflection, MatchesTrajectory) {
    const auto m = build_boundary(rect(kRhoMid, 0.1, 0.3));
    const auto c = make_stem_case(m);
    const double theta = 1e-3;
    int checked = 0;
    for (double frac : {0.1, 0.25, 0.4, 0.55, 0.7, 0.85}) {
        // Choose omega in the interior of each window.
        const double omega = frac * c.rho;
        const double d1 = 2.0 * c.R * theta * omega;
        const double step = 2.0 * c.r() * std::tan(theta);
        const double x = 1.0 - d1 - 40.0 * step;
        const Reflection r = reflection_outcome(x, theta, c);
        ASSERT_EQ(r.n, 40);
        const Traced tr = trace(m, x, theta, c.h_plus);
        EXPECT_EQ(tr.arc_hits, r.k) << "omega " << omega;
        EXPECT_NEAR(tr.theta_f, std::abs(r.theta_f), 1e-3 * std::abs(r.theta_f)) << "omega " << omega;
        ++checked;
    }
    EXPECT_EQ(checked, 6);
}

TEST(EscapeTime, ImprovesAsAngleShrinks) {
    const auto m = build_boundary(rect(kRhoMid, 0.1, 0.3));
    const auto c = make_stem_case(m);
    for (double frac : {0.2, 0.5, 0.8}) {
        double prev = 1e9;
        for (double theta : {1e-2, 1e-3, 1e-4}) {
            const double omega = frac * c.rho;
            const double d1 = 2.0 * c.R * theta * omega;
            const double step = 2.0 * c.r() * std::tan(theta);
            const double x = 1.0 - d1 - std::floor(0.5 / step) * step;
            const double t_model = escape_time(x, theta, c);
            const Traced tr = trace(m, x, theta, c.h_plus);
            const double err = std::abs(t_model - tr.t_cross) / tr.t_cross;
            EXPECT_LT(err, prev) << "theta " << theta << " omega " << omega;
            prev = err;
        }
        EXPECT_LT(prev, 1e-3);
    }
}

TEST(EscapeTime, Limits) {
    const auto c = make_stem_case(0.6, 1.0, 0.1, 0.3);
    Reflection r;
    r.k = 2;
    r.theta_f = 1e-3;
    EXPECT_NEAR(escape_time(1.0, 0.01, r, c), 0.7 / 1e-3 + 2 * (0.6 + 3), 1e-9);
    r.theta_f = 1e-300;
    EXPECT_GT(escape_time(0.5, 0.01, r, c), 1e299);
}

TEST(Corners, TabulatedFormsUseZeroOffset) {
    for (double hp : {0.1, 0.3}) {
        const auto c = make_stem_case(0.6, 1.0, 0.0, hp);
        for (long long n : {0, 1, 5}) {
            const auto mine = polygon_corners(n, 50.0, c, 0.0);
            const auto pub = published_corners(n, 50.0, c);
            for (char X : {'A', 'B', 'C', 'D', 'E', 'F'}) {
                EXPECT_NEAR(mine[X].x, pub[X].x, 1e-9) << X << " n=" << n;
                EXPECT_NEAR(mine[X].theta, pub[X].theta, 1e-9) << X << " n=" << n;
            }
            EXPECT_EQ(pub.G.x, 1.0);
            EXPECT_EQ(pub.G.theta, 0.0);
        }
    }
}

TEST(Corners, LieOnTheirDefiningCurves) {
    const auto c = make_stem_case(kRhoMid, 1.0, 0.1, 0.3);
    const auto specs = corner_specs(c);
    for (long long n : {0, 1, 3}) {
        const auto pc = polygon_corners(n, 500.0, c);
        for (std::size_t i = 0; i < 6; ++i) {
            const PhasePoint p = pc.corner[i];
            // On the ray omega = const ...
            const double a = c.L - p.x;
            EXPECT_NEAR(a / (2 * c.R * p.theta) - c.rho * n, specs[i].omega, 1e-9);
            // ... and on the escape curve t(x, theta, k) = t.
            Reflection r;
            r.k = specs[i].k;
            r.theta_f = exit_ratio(specs[i].omega, specs[i].k, c.rho) * p.theta;
            EXPECT_NEAR(escape_time(p.x, p.theta, r, c), 500.0, 1e-9);
        }
        EXPECT_EQ(pc.G.x, c.L);
    }
}

TEST(Thresholds, FirstCornerExample) {
    const auto c = make_stem_case(0.6, 1.0, 0.1, 0.3);
    const auto th = corner_thresholds(50.0, c);
    EXPECT_EQ(static_cast<long long>(std::floor(th.published_nA)), 10);
}

TEST(Thresholds, MatchNumericRoots) {
    for (double hp : {0.1, 0.3, 0.6}) {
        const auto c = make_stem_case(kRhoMid, 1.0, 0.0, hp);
        const double t = 2000.0;
        const auto th = corner_thresholds(t, c);
        for (std::size_t i = 0; i < 6; ++i) {
            long long n = 0;
            while (polygon_corners(n + 1, t, c).corner[i].x >= hp) ++n;
            EXPECT_EQ(th.n[i], n) << "corner " << static_cast<char>('A' + i) << " h+ " << hp;
        }
    }
}

TEST(Thresholds, ScaleLinearly) {
    const auto c = make_stem_case(0.37, 1.0, 0.1, 0.3);
    const auto a = corner_thresholds(1e4, c);
    const auto b = corner_thresholds(2e4, c);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(static_cast<double>(b.n[i]) / static_cast<double>(a.n[i]), 2.0, 0.01);
}

TEST(Thresholds, OrderingDichotomy) {
    int hat = 0, tilde = 0;
    for (int i = 1; i < 10000; ++i) {
        const double rho = i / 10000.0;
        const auto c = make_stem_case(rho, 1.0, 0.1, 0.3);
        if (c.degenerate) continue;
        const auto specs = corner_specs(c);
        std::array<double, 6> v{};
        for (std::size_t k = 0; k < 6; ++k) {
            const double q = exit_ratio(specs[k].omega, specs[k].k, rho);
            v[k] = q / (1 + q);
        }
        const bool h = v[0] < v[1] && v[1] <= v[3] && v[3] < v[4] && v[4] <= v[2] && v[2] < v[5];
        const bool t = v[0] < v[3] && v[3] <= v[1] && v[1] < v[2] && v[2] <= v[4] && v[4] < v[5];
        if (std::abs(v[1] - v[3]) < 1e-12 || std::abs(v[2] - v[4]) < 1e-12) continue;  // on a crossing
        ASSERT_TRUE(h || t) << "rho " << rho;
        EXPECT_EQ(h ? StemOrdering::Hat : StemOrdering::Tilde, continuum_ordering(c));
        (h ? hat : tilde)++;
        // Far enough from the crossings, the discrete thresholds agree.
        double gap = 1.0;
        for (std::size_t a = 0; a < 6; ++a)
            for (std::size_t b = a + 1; b < 6; ++b) gap = std::min(gap, std::abs(v[a] - v[b]));
        if (gap > 1e-3) {
            EXPECT_EQ(corner_thresholds(1e7, c).ordering, continuum_ordering(c)) << "rho " << rho;
        }
    }
    EXPECT_GT(hat, 0);
    EXPECT_GT(tilde, 0);
}

TEST(Sums, FirstAndLast) {
    for (double rho : {0.2, 0.45, 0.64, 0.9}) {
        const auto c = make_stem_case(rho, 1.0, 0.1, 0.3);
        const auto s = seven_sums(c);
        const double l2 = 0.49;
        EXPECT_NEAR(s.sums[0], l2 / (2 * (2 * rho + 1)), 1e-12);
        EXPECT_NEAR(s.sums[6], l2 * (rho + 1) / (2 * rho + 1), 1e-12);
        const auto pub = published_sums(c);
        EXPECT_NEAR(pub[0], s.sums[0], 1e-12);
        EXPECT_NEAR(pub[6], s.sums[6], 1e-12);
    }
}

TEST(Sums, ClosedFormEqualsSevenSums) {
    for (int i = 1; i < 200; ++i) {
        const double rho = 0.005 + 0.99 * i / 200.0;
        const auto c = make_stem_case(rho, 1.0, 0.1, 0.3);
        if (c.degenerate) continue;
        EXPECT_NEAR(seven_sums(c).total, 0.49 * stem_core(c), 1e-10 * seven_sums(c).total) << "rho " << rho;
    }
}

TEST(Sums, ShoelaceConvergesAsOneOverT) {
    for (double rho : {0.13, 0.37, 0.64, 0.83}) {
        const auto c = make_stem_case(rho, 1.0, 0.1, 0.3);
        const double want = seven_sums(c).total;
        double prev = 1.0;
        for (double t : {1e3, 1e4, 1e5}) {
            const double err = std::abs(t * polygon_area_sum(c, t) - want) / want;
            EXPECT_LT(err, prev * 0.2) << "rho " << rho << " t " << t;
            prev = err;
        }
        EXPECT_LT(prev, 1e-3);
    }
}

TEST(Core, StadiumLimit) {
    const auto c = make_stem_case(1.0 - 1e-12, 1.0, 0.1, 0.3);
    EXPECT_EQ(c.zeta, 2);
    EXPECT_NEAR(stem_core(c) / stadium_core(), 1.0, 1e-6);
}

TEST(Core, SmallRhoLimit) {
    for (double rho : {1e-3, 3.7e-4}) {
        const auto c = make_stem_case(rho, 1.0, 0.1, 0.3);
        EXPECT_NEAR(stem_core(c), 1.5, 5e-3) << rho;
    }
}

TEST(Core, ContinuousAcrossDegeneratePoints) {
    for (double r : {0.5, 1.0 / 3.0, 0.25}) {
        const auto at = make_stem_case(r, 1.0, 0.1, 0.3);
        const auto below = make_stem_case(r - 1e-9, 1.0, 0.1, 0.3);
        EXPECT_TRUE(at.degenerate);
        EXPECT_NEAR(stem_core(at), stem_core(below), 1e-6);
    }
}

TEST(Core, DerivedCoefficients) {
    const auto k = derived_coefficients(3);
    EXPECT_DOUBLE_EQ(k.eps[0], 24.0);
    EXPECT_DOUBLE_EQ(k.j1, 30.0);
    EXPECT_DOUBLE_EQ(k.j2, 2.0);
}

TEST(StemC, Assembled) {
    const auto m = build_boundary(rect(kRhoMid, 0.28, 0.3));
    const auto c = make_stem_case(m);
    EXPECT_NEAR(c.norm, 2 * m.perimeter() * ergodic_measure(m), 1e-15);
    EXPECT_NEAR(stem_C(c), direct_regular_C(c) + 2 * 0.49 * stem_core(c) / c.norm, 1e-15);
}

TEST(StemC, MatchesStemSurvivors) {
    // Launches from the stem walls carry all of the 1/t mass once the
    // exponential part has died out.
    const auto m = build_boundary(rect(kRhoMid, 0.28, 0.3));
    const auto c = make_stem_case(m);
    const double t = 1e4, delta = 0.002;
    const std::uint64_t n = 100'000;
    std::uint64_t alive = 0;
    const auto& segs = m.segments();
    for (std::uint64_t i = 0; i < n; ++i) {
        StreamRng rng(31, i);
        const int wall = rng.uniform() < 0.5 ? 2 : 4;
        const BirkhoffCoord ic{segs[wall].z0 + rng.uniform(0.0, segs[wall].length), rng.uniform(-delta, delta)};
        const EscapeRecord rec = evolve_until_escape(ic, m, t);
        alive += !rec.escaped && !rec.corner_flag;
    }
    const double measure = 2.0 * c.L * 2.0 * delta * static_cast<double>(alive) / static_cast<double>(n) / c.norm;
    EXPECT_NEAR(measure * t / stem_C(c), 1.0, 0.10);
}
