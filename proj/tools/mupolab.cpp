// Command-line front end: mupos, classify, predict, simulate, phase, verify.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <regex>

#include "mupolab/mupolab.hpp"

using json = nlohmann::ordered_json;
using namespace mupolab;

namespace {

Error config_error(const std::string& what) { return Error(ErrorCode::InvalidConfig, what); }

/// Integer, "p/q", "k*(p+q*sqrt(d))/m" and the variants with parts left out.
QuadraticSurd parse_surd(std::string text) {
    text.erase(std::remove_if(text.begin(), text.end(), ::isspace), text.end());
    static const std::regex re(R"(^(?:(\d+)\*)?\(?(-?\d+)?(?:([+-])(\d*)\*?sqrt\((\d+)\))?\)?(?:/(\d+))?$)");
    std::smatch m;
    if (text.empty() || !std::regex_match(text, m, re) || (!m[2].matched && !m[5].matched))
        throw config_error("cannot parse number '" + text + "'; use p/q or (p+q*sqrt(d))/m");
    const BigInt k = m[1].matched ? BigInt(m[1].str()) : BigInt(1);
    const BigInt p = m[2].matched ? BigInt(m[2].str()) : BigInt(0);
    BigInt q = 0, d = 0;
    if (m[5].matched) {
        q = m[4].length() ? BigInt(m[4].str()) : BigInt(1);
        if (m[3].str() == "-") q = -q;
        d = BigInt(m[5].str());
    }
    const BigInt den = m[6].matched ? BigInt(m[6].str()) : BigInt(1);
    if (den == 0) throw config_error("zero denominator in '" + text + "'");
    return QuadraticSurd(k * p, k * q, den, d);
}

/// "p/q" or a terminating decimal, read exactly.
Rational parse_rational(const std::string& text) {
    static const std::regex frac(R"(^\s*(-?\d+)\s*/\s*(\d+)\s*$)");
    static const std::regex dec(R"(^\s*(-?)(\d*)\.?(\d*)\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, frac)) {
        if (BigInt(m[2].str()) == 0) throw config_error("zero denominator in '" + text + "'");
        return Rational(BigInt(m[1].str()), BigInt(m[2].str()));
    }
    if (std::regex_match(text, m, dec) && (m[2].length() || m[3].length())) {
        BigInt num(std::string(m[2].length() ? m[2].str() : "0") + m[3].str());
        BigInt den = 1;
        for (long i = 0; i < m[3].length(); ++i) den *= 10;
        if (m[1].str() == "-") num = -num;
        return Rational(num, den);
    }
    throw config_error("cannot parse rational '" + text + "'");
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw config_error(where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end())
            throw config_error("unknown key '" + key + "' in " + where);
    }
}

double number_at(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw config_error(std::string("'") + key + "' must be a number");
    return obj[key].get<double>();
}

/// Geometry resolved from the config file and command-line overrides.
struct Geometry {
    MushroomSpec spec;
    RhoInput rho;
    json resolved;
};

struct GeometryFlags {
    std::string config;
    std::optional<double> rho;
    std::string theta_star;
    std::string stem;
};

Geometry resolve_geometry(const GeometryFlags& f, bool need_hole) {
    json cfg = json::object();
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw config_error("cannot open config '" + f.config + "'");
        try {
            cfg = json::parse(in);
        } catch (const json::exception& e) {
            throw config_error(std::string("config is not valid JSON: ") + e.what());
        }
    }
    check_keys(cfg, {"R", "r", "rho", "theta_star", "hat_fraction", "stem", "hole"}, "config");
    const json stem = cfg.value("stem", json::object());
    check_keys(stem, {"kind", "L"}, "stem");
    const json hole = cfg.value("hole", json::object());
    check_keys(hole, {"lo", "hi"}, "hole");

    Geometry g;
    g.spec.hat_radius = number_at(cfg, "R", 1.0);
    g.spec.hat_fraction = number_at(cfg, "hat_fraction", 0.5);
    g.spec.stem_length = number_at(stem, "L", 1.0);
    std::string kind = stem.contains("kind") ? stem["kind"].get<std::string>() : "rectangular";
    if (!f.stem.empty()) kind = f.stem;
    if (kind != "rectangular" && kind != "triangular") throw config_error("stem.kind must be rectangular or triangular");
    g.spec.stem = kind == "rectangular" ? StemKind::Rectangular : StemKind::Triangular;

    std::string theta = f.theta_star;
    if (theta.empty() && !f.rho && cfg.contains("theta_star")) {
        if (!cfg["theta_star"].is_string()) throw config_error("'theta_star' must be a string such as \"871/2500\"");
        theta = cfg["theta_star"].get<std::string>();
    }
    const int given = static_cast<int>(cfg.contains("rho")) + static_cast<int>(cfg.contains("r")) +
                      static_cast<int>(cfg.contains("theta_star"));
    if (given > 1) throw config_error("give only one of rho, r, theta_star");
    if (!theta.empty()) {
        g.rho = RhoInput::from_theta_star(parse_surd(theta));
    } else if (f.rho) {
        g.rho = RhoInput::from_rho(*f.rho);
    } else if (cfg.contains("rho")) {
        g.rho = RhoInput::from_rho(number_at(cfg, "rho", 0.0));
    } else if (cfg.contains("r")) {
        g.rho = RhoInput::from_rho(number_at(cfg, "r", 0.0) / g.spec.hat_radius);
    } else {
        throw config_error("the geometry needs rho, r or theta_star");
    }
    g.spec.stem_half_width = g.rho.value() * g.spec.hat_radius;
    if (!hole.empty()) {
        g.spec.hole = HoleSpec{g.spec.stem == StemKind::Rectangular ? HoleWall::RectStemRightWall
                                                                    : HoleWall::TriangularStemEdge,
                               number_at(hole, "lo", 0.0), number_at(hole, "hi", 0.0)};
    } else if (need_hole) {
        throw config_error("this command needs a hole {lo, hi}");
    }

    g.resolved = {{"R", g.spec.hat_radius},
                  {"rho", g.rho.value()},
                  {"hat_fraction", g.spec.hat_fraction},
                  {"stem", {{"kind", kind}, {"L", g.spec.stem_length}}}};
    if (g.rho.theta_star) g.resolved["theta_star"] = g.rho.theta_star->to_string();
    if (g.spec.hole) g.resolved["hole"] = {{"lo", g.spec.hole->lo}, {"hi", g.spec.hole->hi}};
    return g;
}

json mupo_json(const Mupo& m) {
    return {{"s", m.s},           {"j", m.j},           {"lambda", m.lambda},     {"alpha_sj", m.alpha_sj},
            {"beta_sj", m.beta_sj}, {"theta_sj", m.theta_sj}, {"on_border", m.on_border}};
}

json gen_json(const GenMupo& g) { return {{"p", g.p}, {"q", g.q}, {"on_border", g.on_border}}; }

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write '" + path + "'");
    return out;
}

struct Run {
    std::string command;
    std::vector<std::string> argv;
    std::string out;
    std::string manifest;
    int precision = 12;
    json config = json::object();
    json parameters = json::object();
    std::vector<std::string> artifacts;

    /// Structured result: to --out if given (and echoed nowhere else), otherwise stdout.
    void emit_json(const json& j) {
        if (!out.empty()) {
            open_out(out) << j.dump(2) << "\n";
            artifacts.push_back(out);
        } else {
            std::cout << j.dump(2) << std::endl;
        }
    }

    void write_manifest() const {
        const std::string path =
            !manifest.empty() ? manifest : (!out.empty() ? out + ".manifest.json" : "mupolab_manifest.json");
        json m = {{"tool", "mupolab"},
                  {"version", version},
                  {"command", command},
                  {"argv", argv},
                  {"config", config},
                  {"parameters", parameters},
                  {"artifacts", artifacts},
                  {"threads", worker_count()}};
        open_out(path) << m.dump(2) << "\n";
    }
};

void add_geometry_flags(CLI::App* sub, GeometryFlags& f, bool with_stem) {
    sub->add_option("--config", f.config, "JSON geometry file");
    sub->add_option("--rho", f.rho, "stem half-width over hat radius");
    sub->add_option("--theta-star", f.theta_star, "exact arccos(rho)/pi, e.g. 871/2500 or (5+sqrt(2))/23");
    if (with_stem) sub->add_option("--stem", f.stem, "rectangular or triangular")->check(CLI::IsMember({"rectangular", "triangular"}));
}

void cmd_mupos(Run& run, const GeometryFlags& f, const std::string& alpha_text, int s_max) {
    const Geometry g = resolve_geometry(f, false);
    run.config = g.resolved;
    const Rational alpha = alpha_text.empty() ? Rational(1, 2) : parse_rational(alpha_text);
    run.parameters = {{"s_max", s_max}, {"alpha", alpha.str()}};
    json out = json::array();
    if (alpha == Rational(1, 2)) {
        for (const auto& m : enumerate_mupos(g.rho, s_max)) out.push_back(mupo_json(m));
    } else {
        for (const auto& m : enumerate_mupos_generalized(g.rho, alpha, s_max)) out.push_back(gen_json(m));
    }
    run.emit_json(out);
}

void cmd_classify(Run& run, const GeometryFlags& f, const std::string& xi_text, const std::string& alpha_text,
                  long long Q) {
    const Rational alpha = alpha_text.empty() ? Rational(1, 2) : parse_rational(alpha_text);
    QuadraticSurd xi;
    if (!xi_text.empty()) {
        xi = parse_surd(xi_text);
    } else {
        const Geometry g = resolve_geometry(f, false);
        if (!g.rho.theta_star) throw Error(ErrorCode::DomainError, "classify needs an exact --theta-star or --xi");
        xi = *g.rho.theta_star * QuadraticSurd::rational(alpha).reciprocal();
        run.config = g.resolved;
    }
    run.parameters = {{"xi", xi.to_string()}, {"alpha", alpha.str()}, {"Q", Q}};
    const StickinessClass c = classify(xi, alpha, Q);
    json found = json::array(), orbits = json::array();
    for (const auto& g : c.found) found.push_back(gen_json(g));
    for (const auto& m : c.orbits) orbits.push_back(mupo_json(m));
    run.emit_json({{"xi", xi.to_string()},
                   {"cf", expand(xi).to_string()},
                   {"kind", to_string(c.kind)},
                   {"checked_to", c.checked_to},
                   {"certificate", to_string(c.certificate)},
                   {"witness", c.witness},
                   {"found", found},
                   {"orbits", orbits}});
}

struct PredictFlags {
    double t_min = 1.0;
    double t_max = 1e5;
    int points = 100;
    int s_max = 1000;
};

void cmd_predict(Run& run, const GeometryFlags& f, const PredictFlags& p) {
    const Geometry g = resolve_geometry(f, true);
    const BoundaryModel model = build_boundary(g.spec);
    run.config = g.resolved;
    run.parameters = {{"t_min", p.t_min}, {"t_max", p.t_max}, {"points", p.points}, {"s_max", p.s_max}};
    if (!(p.t_min > 0.0 && p.t_max > p.t_min && p.points >= 2)) throw config_error("need 0 < t_min < t_max, points >= 2");

    const HatSeries hat = hat_C_series(model, g.rho, 1e-6, p.s_max);
    SurvivalPrediction pred = predict_hat(model, hat.mupos, g.rho.rho);
    json header = {{"A", pred.island_measure},
                   {"B", pred.ergodic_measure},
                   {"gamma_bar", pred.escape_rate},
                   {"C", pred.C},
                   {"C_hat", pred.C},
                   {"tail_estimate", hat.tail_bound},
                   {"mupos", json::array()}};
    for (const auto& m : hat.mupos) header["mupos"].push_back(mupo_json(m));
    if (g.spec.stem == StemKind::Rectangular) {
        const StemCase c = make_stem_case(model);
        const double cs = stem_C(c);
        pred.C += cs;
        pred.source = PredictionSource::Combined;
        header["C"] = pred.C;
        header["C_stem"] = cs;
        header["C_direct"] = direct_regular_C(c);
        header["ordering"] = to_string(continuum_ordering(c));
        header["zeta"] = c.zeta;
        header["degenerate"] = c.degenerate;
        const auto th = threshold_values(p.t_max, c);
        json n = json::object();
        for (std::size_t i = 0; i < 6; ++i) n[std::string(1, static_cast<char>('A' + i))] = th[i];
        header["n_thresholds"] = n;
        header["n_thresholds_at_t"] = p.t_max;
    }
    header["source"] = to_string(pred.source);

    const std::string csv_path = run.out.empty() ? "predict.csv" : run.out;
    std::ofstream csv = open_out(csv_path);
    csv << std::setprecision(run.precision) << "t,Pe_exponential,Pe_powerlaw,Pe_total\n";
    for (double t : log_edges(p.t_min, p.t_max, p.points - 1)) {
        const double e = std::exp(-pred.escape_rate * t), w = pred.C / t;
        csv << t << "," << e << "," << w << "," << e + w << "\n";
    }
    run.artifacts.push_back(csv_path);
    const std::string header_path = csv_path + ".json";
    open_out(header_path) << header.dump(2) << "\n";
    run.artifacts.push_back(header_path);
    if (run.out.empty()) run.out = csv_path;
    std::cout << header.dump(2) << std::endl;
}

struct SimulateFlags {
    std::uint64_t particles = 1'000'000;
    std::uint64_t seed = 1;
    double t_max = 0.0;
    double t_min = 1.0;
    int bins = 100;
};

void cmd_simulate(Run& run, const GeometryFlags& f, const SimulateFlags& s) {
    const Geometry g = resolve_geometry(f, true);
    const BoundaryModel model = build_boundary(g.spec);
    run.config = g.resolved;
    double t_max = s.t_max;
    if (t_max <= 0.0) t_max = std::min(50.0 / escape_rate(model), 1e6);
    if (!(t_max > s.t_min && s.t_min > 0.0 && s.bins >= 1)) throw config_error("need 0 < t_min < t_max and bins >= 1");
    run.parameters = {{"particles", s.particles}, {"seed", s.seed}, {"t_min", s.t_min}, {"t_max", t_max}, {"bins", s.bins}};
    const SurvivalCurve c = survival_curve(model, s.particles, t_max, s.bins, s.seed, 0, s.t_min);
    const std::string csv_path = run.out.empty() ? "simulate.csv" : run.out;
    std::ofstream csv = open_out(csv_path);
    csv << std::setprecision(run.precision) << "t_lo,t_hi,survivors,fraction,stderr\n";
    for (std::size_t i = 0; i + 1 < c.edges.size(); ++i)
        csv << c.edges[i] << "," << c.edges[i + 1] << "," << c.survivors[i + 1] << "," << c.fraction(i + 1) << ","
            << c.stderr_at(i + 1) << "\n";
    run.artifacts.push_back(csv_path);
    if (run.out.empty()) run.out = csv_path;
    std::cout << json{{"particles", c.particles},
                      {"corner_events", c.corner_events},
                      {"rejected_island_draws", c.rejected},
                      {"collisions", c.collisions},
                      {"seed", c.seed},
                      {"spec_hash", c.spec_hash},
                      {"gamma_bar", escape_rate(model)},
                      {"csv", csv_path}}
                     .dump(2)
              << std::endl;
}

void cmd_phase(Run& run, double rho, int N, std::uint64_t samples, std::uint64_t seed) {
    if (!(rho > 0.0 && rho < 1.0) || N < 1) throw config_error("need 0 < rho < 1 and N >= 1");
    run.config = {{"rho", rho}};
    run.parameters = {{"N", N}, {"samples", samples}, {"seed", seed}};
    const PhaseMap map = survivor_phase_map(rho, N, samples, seed);
    const std::string csv_path = run.out.empty() ? "phase.csv" : run.out;
    std::ofstream csv = open_out(csv_path);
    csv << std::setprecision(run.precision) << "phi,sin_theta\n";
    for (const auto& [phi, s] : map.points) csv << phi << "," << s << "\n";
    run.artifacts.push_back(csv_path);
    if (run.out.empty()) run.out = csv_path;
    std::cout << json{{"survivors", map.points.size()}, {"samples", samples}, {"csv", csv_path}}.dump(2) << std::endl;
}

int cmd_verify(Run& run, const std::vector<int>& only, std::uint64_t particles) {
    VerifyOptions o;
    if (particles > 0) o.hat_particles = o.stem_particles = particles;
    run.parameters = {{"only", only}, {"hat_particles", o.hat_particles}, {"stem_particles", o.stem_particles}};
    json report = json::array();
    std::vector<CriterionResult> all;
    for (int id = 1; id <= 12; ++id) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto r = run_acceptance(o, {id});
        std::cout << format_result(r.front()) << std::endl;
        all.push_back(r.front());
        report.push_back({{"id", r[0].id},
                          {"name", r[0].name},
                          {"pass", r[0].pass},
                          {"known_deviation", r[0].known_deviation},
                          {"measured", r[0].measured},
                          {"expected", r[0].expected},
                          {"seconds", r[0].seconds}});
    }
    if (!run.out.empty()) {
        open_out(run.out) << report.dump(2) << "\n";
        run.artifacts.push_back(run.out);
    }
    return suite_ok(all) ? 0 : 1;
}

void print_error(const std::string& code, const std::string& message) {
    std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Marginally unstable periodic orbits and survival in mushroom billiards"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    Run run;
    for (int i = 0; i < argc; ++i) run.argv.emplace_back(argv[i]);
    GeometryFlags geo;
    std::string alpha, xi;
    int s_max = 1000;
    long long Q = 1000;
    PredictFlags pf;
    SimulateFlags sf;
    double phase_rho = 0.0;
    int phase_N = 200;
    std::uint64_t phase_samples = 1'000'000, phase_seed = 1, verify_particles = 0;
    std::vector<int> only;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--out", run.out, "output path");
        sub->add_option("--manifest", run.manifest, "manifest path (default: <out>.manifest.json)");
        sub->add_option("--precision", run.precision, "significant digits in CSV output")->check(CLI::Range(1, 17));
    };

    auto* mupos = app.add_subcommand("mupos", "list MUPOs (s, j) up to --s-max");
    add_geometry_flags(mupos, geo, false);
    mupos->add_option("--alpha", alpha, "hat opening angle over pi (default 1/2)");
    mupos->add_option("--s-max", s_max, "largest period")->required()->check(CLI::PositiveNumber);
    common(mupos);

    auto* cls = app.add_subcommand("classify", "certify MUPO-free, finitely or infinitely sticky");
    add_geometry_flags(cls, geo, false);
    cls->add_option("--xi", xi, "theta*/alpha as a surd, e.g. 2*(5+sqrt(2))/23");
    cls->add_option("--alpha", alpha, "hat opening angle over pi (default 1/2)");
    cls->add_option("--s-max", Q, "search bound Q")->check(CLI::PositiveNumber);
    common(cls);

    auto* predict = app.add_subcommand("predict", "closed-form survival prediction");
    add_geometry_flags(predict, geo, true);
    predict->add_option("--t-min", pf.t_min);
    predict->add_option("--t-max", pf.t_max);
    predict->add_option("--points", pf.points);
    predict->add_option("--s-max", pf.s_max, "direct enumeration bound before the convergent tail");
    common(predict);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo survival curve");
    add_geometry_flags(sim, geo, true);
    sim->add_option("--particles", sf.particles);
    sim->add_option("--seed", sf.seed);
    sim->add_option("--t-max", sf.t_max, "default 50 / gamma_bar, at most 1e6");
    sim->add_option("--t-min", sf.t_min);
    sim->add_option("--bins", sf.bins);
    common(sim);

    auto* phase = app.add_subcommand("phase", "survivors of the circle map with a slit");
    phase->add_option("--rho", phase_rho)->required();
    phase->add_option("--N", phase_N);
    phase->add_option("--samples", phase_samples);
    phase->add_option("--seed", phase_seed);
    common(phase);

    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    verify->add_option("--only", only, "criterion numbers");
    verify->add_option("--particles", verify_particles, "particles for the two plateau criteria");
    common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("InvalidArguments", e.what());
        return 2;
    }

    try {
        int status = 0;
        if (*mupos) {
            run.command = "mupos";
            cmd_mupos(run, geo, alpha, s_max);
        } else if (*cls) {
            run.command = "classify";
            cmd_classify(run, geo, xi, alpha, Q);
        } else if (*predict) {
            run.command = "predict";
            cmd_predict(run, geo, pf);
        } else if (*sim) {
            run.command = "simulate";
            cmd_simulate(run, geo, sf);
        } else if (*phase) {
            run.command = "phase";
            cmd_phase(run, phase_rho, phase_N, phase_samples, phase_seed);
        } else if (*verify) {
            run.command = "verify";
            status = cmd_verify(run, only, verify_particles);
        }
        run.write_manifest();
        return status;
    } catch (const Error& e) {
        print_error(to_string(e.code()), e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error("Internal", e.what());
        return 3;
    }
}
