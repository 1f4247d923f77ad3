#pragma once

/// @file montecarlo.hpp
/// @brief Escape simulation of open mushroom billiards and survivor phase maps.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "geometry.hpp"
#include "hat.hpp"

namespace mupolab {

/// splitmix64 stream. Streams keyed by (seed, index) are independent of how
/// particles are distributed over threads.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t index) : state_(mix(seed ^ mix(index + 0x632be59bd9b4e019ULL))) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

/// Worker count: MUPOLAB_THREADS if set, else the hardware concurrency.
inline unsigned worker_count(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MUPOLAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Run body(i) for i in [0, n) over `workers` threads, strided by worker.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(unsigned, std::size_t)>& body) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(0, i);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) body(w, i);
        });
    for (auto& th : pool) th.join();
}

/// Uniform draw from the Birkhoff measure restricted to the ergodic component.
inline BirkhoffCoord sample_ergodic_ic(StreamRng& rng, const BoundaryModel& model, std::uint64_t* rejected = nullptr) {
    while (true) {
        const BirkhoffCoord c{rng.uniform(0.0, model.perimeter()), rng.uniform(-1.0, 1.0)};
        if (!in_regular_region(c, model)) return c;
        if (rejected) ++*rejected;
    }
}

struct EscapeRecord {
    bool escaped = false;
    double time = 0.0;
    std::uint64_t collisions = 0;
    bool corner_flag = false;
};

/// Follow an orbit until it lands strictly inside the hole or exceeds t_max.
inline EscapeRecord evolve_until_escape(BirkhoffCoord ic, const BoundaryModel& model, double t_max) {
    if (model.hole_segment() < 0) throw Error(ErrorCode::InvalidConfig, "simulation needs a hole");
    EscapeRecord rec;
    int seg = -1;
    ParticleState st = from_birkhoff(ic, model, &seg);
    while (true) {
        const StepResult step = next_collision(st, model, seg);
        if (step.status != StepStatus::Ok && !(step.status == StepStatus::CornerHit &&
                                                 model.in_hole(step.segment, step.state.position))) {
            rec.corner_flag = true;
            rec.time = step.state.time;
            return rec;
        }
        ++rec.collisions;
        if (step.state.time > t_max) {
            rec.time = t_max;
            return rec;
        }
        if (model.in_hole(step.segment, step.state.position)) {
            rec.escaped = true;
            rec.time = step.state.time;
            return rec;
        }
        st = step.state;
        seg = step.segment;
    }
}

struct SurvivalCurve {
    std::vector<double> edges;              ///< log-spaced times
    std::vector<std::uint64_t> survivors;   ///< alive at each edge
    std::uint64_t particles = 0;            ///< valid (non-corner) particles
    std::uint64_t corner_events = 0;
    std::uint64_t rejected = 0;             ///< island draws rejected while sampling
    std::uint64_t collisions = 0;
    std::uint64_t seed = 0;
    std::string spec_hash;

    double fraction(std::size_t i) const {
        return particles ? static_cast<double>(survivors[i]) / static_cast<double>(particles) : 0.0;
    }
    double stderr_at(std::size_t i) const {
        const double p = fraction(i);
        return particles ? std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(particles)) /
                                     static_cast<double>(particles))
                         : 0.0;
    }
};

/// Stable textual digest of a spec, for provenance in run outputs.
inline std::string spec_hash(const MushroomSpec& s) {
    std::string text = std::to_string(s.hat_radius) + "|" + std::to_string(s.stem_half_width) + "|" +
                       std::to_string(s.hat_fraction) + "|" + std::to_string(static_cast<int>(s.stem)) + "|" +
                       std::to_string(s.stem_length);
    if (s.hole)
        text += "|" + std::to_string(static_cast<int>(s.hole->wall)) + "|" + std::to_string(s.hole->lo) + "|" +
                std::to_string(s.hole->hi);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::vector<double> log_edges(double t_min, double t_max, int bins) {
    std::vector<double> e(static_cast<std::size_t>(bins) + 1);
    const double a = std::log(t_min), b = std::log(t_max);
    for (int i = 0; i <= bins; ++i) e[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / bins);
    e.back() = t_max;
    return e;
}

/// Conditional survival P_e(t) at log-spaced times from ergodic initial conditions.
inline SurvivalCurve survival_curve(const BoundaryModel& model, std::uint64_t n_particles, double t_max, int bins,
                                    std::uint64_t seed, unsigned threads = 0, double t_min = 1.0) {
    SurvivalCurve out;
    out.edges = log_edges(t_min, t_max, bins);
    out.seed = seed;
    out.spec_hash = spec_hash(model.spec());
    const unsigned W = worker_count(threads);
    struct Acc {
        std::vector<std::uint64_t> escaped_by;  // escapes in (edge[i-1], edge[i]]
        std::uint64_t corner = 0, valid = 0, rejected = 0, collisions = 0;
    };
    std::vector<Acc> acc(W);
    for (auto& a : acc) a.escaped_by.assign(out.edges.size() + 1, 0);
    parallel_for(n_particles, W, [&](unsigned w, std::size_t i) {
        StreamRng rng(seed, i);
        Acc& a = acc[w];
        const BirkhoffCoord ic = sample_ergodic_ic(rng, model, &a.rejected);
        const EscapeRecord rec = evolve_until_escape(ic, model, t_max);
        a.collisions += rec.collisions;
        if (rec.corner_flag) {
            ++a.corner;
            return;
        }
        ++a.valid;
        if (!rec.escaped) return;
        // first edge >= time
        const auto it = std::lower_bound(out.edges.begin(), out.edges.end(), rec.time);
        ++a.escaped_by[static_cast<std::size_t>(it - out.edges.begin())];
    });
    std::vector<std::uint64_t> esc(out.edges.size() + 1, 0);
    for (const auto& a : acc) {
        out.corner_events += a.corner;
        out.particles += a.valid;
        out.rejected += a.rejected;
        out.collisions += a.collisions;
        for (std::size_t i = 0; i < esc.size(); ++i) esc[i] += a.escaped_by[i];
    }
    out.survivors.resize(out.edges.size());
    std::uint64_t gone = 0;
    for (std::size_t i = 0; i < out.edges.size(); ++i) {
        gone += esc[i];
        out.survivors[i] = out.particles - gone;
    }
    return out;
}

/// Least-squares slope of ln P_e over edges in [t_lo, t_hi], returned as a
/// positive rate, with binomial weights.
inline double fit_escape_rate(const SurvivalCurve& c, double t_lo, double t_hi) {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < c.edges.size(); ++i) {
        const double t = c.edges[i];
        if (t < t_lo || t > t_hi || c.survivors[i] == 0) continue;
        const double w = static_cast<double>(c.survivors[i]);  // var(ln p) ~ 1/count
        const double y = std::log(c.fraction(i));
        sw += w;
        sx += w * t;
        sy += w * y;
        sxx += w * t * t;
        sxy += w * t * y;
    }
    const double den = sw * sxx - sx * sx;
    if (!(den > 0)) return 0.0;
    return -(sw * sxy - sx * sy) / den;
}

struct PlateauEstimate {
    double value = 0.0;
    double stderr = 0.0;
    std::size_t points = 0;
};

/// Mean of t (P_e(t) - e^{-gamma t}) over edges in [t_lo, t_hi]. The error is
/// the mean per-point binomial error, which is conservative because the
/// points share particles.
inline PlateauEstimate plateau(const SurvivalCurve& c, double gamma, double t_lo, double t_hi) {
    PlateauEstimate p;
    double sum = 0.0, err = 0.0;
    for (std::size_t i = 0; i < c.edges.size(); ++i) {
        const double t = c.edges[i];
        if (t < t_lo || t > t_hi) continue;
        sum += t * (c.fraction(i) - std::exp(-gamma * t));
        err += t * c.stderr_at(i);
        ++p.points;
    }
    if (p.points) {
        p.value = sum / static_cast<double>(p.points);
        p.stderr = err / static_cast<double>(p.points);
    }
    return p;
}

struct PhaseMap {
    double rho = 0.0;
    int N = 0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<double, double>> points;  ///< (phi, sin theta)
};

/// True if the chord of the circle map leaving phi at angle psi crosses the
/// slit |x| < rho on the horizontal diameter.
inline bool crosses_slit(double phi, double psi, double rho) {
    const double a = phi;
    const double b = phi + std::numbers::pi - 2.0 * psi;
    const double ya = std::sin(a), yb = std::sin(b);
    if (!(ya * yb < 0.0)) return false;
    const double xa = std::cos(a), xb = std::cos(b);
    const double x = xa + (xb - xa) * ya / (ya - yb);
    return std::abs(x) < rho;
}

/// Number of circle-map steps survived, capped at N.
inline int survive_steps(double phi, double psi, double rho, int N) {
    for (int n = 0; n < N; ++n) {
        if (crosses_slit(phi, psi, rho)) return n;
        phi = circle_map_step(phi, psi).first;
    }
    return N;
}

/// Initial conditions phi in (0, 2 pi), theta in (psi_lo, psi_hi) surviving N
/// steps of the circle with a slit. A negative psi_hi means arcsin rho.
inline PhaseMap survivor_phase_map(double rho, int N, std::uint64_t n_samples, std::uint64_t seed,
                                   unsigned threads = 0, double psi_lo = 0.0, double psi_hi = -1.0) {
    PhaseMap map;
    map.rho = rho;
    map.N = N;
    map.samples = n_samples;
    map.seed = seed;
    const unsigned W = worker_count(threads);
    std::vector<std::vector<std::pair<std::uint64_t, std::pair<double, double>>>> found(W);
    const double th_max = psi_hi < 0.0 ? std::asin(rho) : psi_hi;
    parallel_for(n_samples, W, [&](unsigned w, std::size_t i) {
        StreamRng rng(seed, i);
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double psi = rng.uniform(psi_lo, th_max);
        if (survive_steps(phi, psi, rho, N) >= N) found[w].push_back({i, {phi, std::sin(psi)}});
    });
    std::vector<std::pair<std::uint64_t, std::pair<double, double>>> all;
    for (auto& f : found) all.insert(all.end(), f.begin(), f.end());
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& p : all) map.points.push_back(p.second);
    return map;
}

/// Whether (phi, psi) lies in the predicted survivor quadrilateral of copy k
/// of MUPO m after N steps: phi - 2 n eta stays inside [phi1, phi2] for
/// n = 0..N, eta = psi - theta_{s,j}.
inline bool in_mupo_quadrilateral(double phi, double psi, const Mupo& m, int N, double rho) {
    const double two_pi = 2.0 * std::numbers::pi;
    const double eta = psi - m.theta_sj;
    const long long copies = m.lambda * m.s;
    for (long long k = 0; k < copies; ++k) {
        const ArcInterval iv = mupo_arc_interval(m, k, rho);
        double width = iv.phi2 - iv.phi1;
        if (width < 0.0) width += two_pi;
        double off = phi - iv.phi1;
        off = std::fmod(off, two_pi);
        if (off < 0.0) off += two_pi;
        const double drift = 2.0 * eta * N;
        if (off <= width && off >= drift && off <= width + drift) return true;
    }
    return false;
}

struct Diagnostics {
    double mean_free_path = 0.0;
    double ks_sin_theta = 0.0;  ///< stem collisions: sin theta against U(-1, 1)
    double ks_position = 0.0;   ///< stem collisions: arclength against uniform on the stem
    std::uint64_t collisions = 0;
    std::uint64_t corner_events = 0;
};

namespace detail {

inline double ks_uniform(std::vector<double> v, double a, double b) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double F = (v[i] - a) / (b - a);
        d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
    }
    return d;
}

}  // namespace detail

/// Long closed orbit (hole ignored) from one ergodic initial condition.
/// Corner hits restart the orbit from a fresh draw.
inline Diagnostics diagnostics(const BoundaryModel& model, std::uint64_t n_collisions, std::uint64_t seed) {
    Diagnostics d;
    StreamRng rng(seed, 0);
    int seg = -1;
    ParticleState st = from_birkhoff(sample_ergodic_ic(rng, model), model, &seg);
    double flight = 0.0;
    std::vector<double> sins, pos;
    sins.reserve(n_collisions / 2);
    pos.reserve(n_collisions / 2);
    double stem_lo = 0.0, stem_hi = 0.0;
    {
        const auto& segs = model.segments();
        stem_lo = segs[2].z0;
        stem_hi = segs[segs.size() - 1].z0;
    }
    while (d.collisions < n_collisions) {
        const StepResult step = next_collision(st, model, seg);
        if (step.status != StepStatus::Ok) {
            ++d.corner_events;
            st = from_birkhoff(sample_ergodic_ic(rng, model), model, &seg);
            continue;
        }
        ++d.collisions;
        flight += step.flight_time;
        st = step.state;
        seg = step.segment;
        if (!model.segments()[seg].on_hat()) {
            const BirkhoffCoord b = to_birkhoff(st, model);
            sins.push_back(b.sin_theta);
            pos.push_back(b.z);
        }
    }
    d.mean_free_path = flight / static_cast<double>(d.collisions);
    d.ks_sin_theta = detail::ks_uniform(std::move(sins), -1.0, 1.0);
    d.ks_position = detail::ks_uniform(std::move(pos), stem_lo, stem_hi);
    return d;
}

}  // namespace mupolab
