// lmc: command-line front end. Every verb reads a flat key = value config and
// writes its results into the output directory.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lmc/asymptotics.hpp"
#include "lmc/bench.hpp"
#include "lmc/errors.hpp"
#include "lmc/nonlocal.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace lmc;

namespace {

struct Common {
    std::string config;
    std::string out = ".";
    bool strict = false;
    int grid_scale = 1;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "config file (key = value)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_flag("--strict", c.strict, "exit with status 1 when a tolerance is violated");
    cmd->add_option("--grid-scale", c.grid_scale, "multiply n_r and n_phi")->check(CLI::PositiveNumber);
}

fs::path out_file(const Common& c, const std::string& name) {
    fs::create_directories(c.out);
    return fs::path(c.out) / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + p.string());
    os << text;
}

void write_json(const fs::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

void write_field_file(const fs::path& p, const ScalarField& u) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + p.string());
    write_field(os, u);
}

ScalarField read_field_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open field '" + path + "'");
    return read_field(is);
}

ScenarioConfig scaled(ScenarioConfig sc, const Common& c) {
    sc.n_r = (sc.n_r - 1) * c.grid_scale + 1;
    sc.n_phi *= c.grid_scale;
    return sc;
}

Json sym_json(const Sym2& m) { return Json::array({m.a11, m.a12, m.a22}); }

Json decay_json(const DecayFit& f) {
    return {{"slope", f.slope},
            {"log_power", f.log_power},
            {"mu", f.detected_mu()},
            {"window", {f.r_lo, f.r_hi}},
            {"fit_residual", f.fit_residual}};
}

std::optional<Window> window_key(const Config& cfg, const std::string& key) {
    if (!cfg.has(key)) return std::nullopt;
    const auto v = cfg.list(key, {});
    if (v.size() != 2) throw ConfigError("key '" + key + "' needs two radii");
    return Window{v[0], v[1]};
}

int verb_oracle(const Common& c) {
    const Config cfg = Config::load(c.config);
    const ScenarioConfig sc = scaled(scenario_from(cfg), c);
    cfg.check_consumed();
    const Oracle o = oracle_field(sc.oracle, sc.grid());
    write_field_file(out_file(c, "u.field"), o.u);
    write_field_file(out_file(c, "f.field"), o.f);
    write_json(out_file(c, "truth.json"), {{"family", to_string(sc.oracle.family)},
                                           {"A", sym_json(o.truth.A)},
                                           {"b", o.truth.b},
                                           {"c", o.truth.c},
                                           {"d", o.truth.d},
                                           {"sigma_claimed", o.truth.sigma},
                                           {"mu_claimed", o.truth.mu},
                                           {"regime", o.claim.slow ? "slow" : "fast"}});
    return 0;
}

int verb_solve(const Common& c) {
    const Config cfg = Config::load(c.config);
    const ScenarioConfig sc = scaled(scenario_from(cfg), c);
    NewtonOptions opts;
    opts.tolerance = cfg.num("newton_tol", opts.tolerance);
    opts.max_iterations = cfg.integer("max_iterations", opts.max_iterations);
    cfg.check_consumed();
    const Oracle o = oracle_field(sc.oracle, sc.grid());
    const SolveOutcome s = solve_oracle(o, sc.oracle, opts);
    const auto& h = s.result.report.residual_history;
    write_field_file(out_file(c, "u.field"), s.result.u);
    write_json(out_file(c, "solve.json"), {{"iterations", s.result.report.iterations},
                                           {"final_residual", h.empty() ? 0.0 : h.back()},
                                           {"converged", s.result.report.converged},
                                           {"error_linf", s.error_linf},
                                           {"residual_history", h}});
    return c.strict && !s.result.report.converged ? 1 : 0;
}

int verb_fit(const Common& c) {
    const Config cfg = Config::load(c.config);
    const ScalarField u = read_field_file(cfg.str("field"));
    const Window w = window_key(cfg, "fit_window").value_or(default_window(u.grid()));
    const auto radii = cfg.list("flux_radii", {});
    std::optional<double> theta;
    if (cfg.has("theta")) theta = cfg.num("theta");
    std::optional<RemainderTerm> extra;
    if (cfg.has("remainder_rate")) extra = RemainderTerm{cfg.num("remainder_rate"), cfg.integer("remainder_log_power", 0)};
    cfg.check_consumed();

    const Sym2 raw = fit_A(u, w);
    const Sym2 a = theta ? project_admissible(raw, *theta) : raw;
    const BcdFit bcd = fit_bcd(u, a, w, extra);
    Json flux = Json::array();
    for (double r : radii) {
        const FluxD fd = flux_d(u, a, r);
        flux.push_back({{"r", r},
                        {"d", fd.d},
                        {"boundary", fd.boundary},
                        {"area", fd.area},
                        {"volume", fd.volume},
                        {"tail", fd.tail},
                        {"tail_rate", fd.tail_rate},
                        {"tail_closed", fd.tail_closed},
                        {"circle_only_d", fd.circle_only_d}});
    }
    Json j{{"window", {w.r_lo, w.r_hi}}, {"A_raw", sym_json(raw)}, {"A", sym_json(a)}, {"b", bcd.b},
           {"c", bcd.c}, {"d", bcd.d}, {"condition", bcd.condition}, {"rms", bcd.rms}};
    if (bcd.remainder_coef) j["remainder_coef"] = *bcd.remainder_coef;
    j["d_flux"] = flux;
    write_json(out_file(c, "fit.json"), j);
    return 0;
}

int verb_decay(const Common& c) {
    const Config cfg = Config::load(c.config);
    const ScalarField u = read_field_file(cfg.str("field"));
    Expansion e;
    const auto a = cfg.list("A", {0, 0, 0});
    const auto b = cfg.list("b", {0, 0});
    if (a.size() != 3 || b.size() != 2) throw ConfigError("A needs three entries and b two");
    e.A = {a[0], a[1], a[2]};
    e.b = {b[0], b[1]};
    e.c = cfg.num("c", 0.0);
    e.d = cfg.num("d", 0.0);
    const Window w = window_key(cfg, "decay_window").value_or(Window{10, 1000});
    const int n = cfg.integer("decay_points", 9);
    std::optional<double> beta;
    if (cfg.has("beta")) beta = cfg.num("beta");
    const double tol = cfg.num("tol_slope", 0.05);
    cfg.check_consumed();

    const auto radii = log_radii(w.r_lo, w.r_hi, n);
    const ScalarField rem = remainder_field(u, e);
    const DecayFit fit = estimate_decay(rem, radii);
    Json j = decay_json(fit);
    Json sup = Json::array();
    for (double r : radii) sup.push_back({r, circle_sup(rem, r)});
    j["circle_sup"] = sup;
    bool pass = true;
    if (beta) {
        const RemainderClaim cl = claimed_remainder(*beta);
        j["claimed_rate"] = cl.rate;
        j["claimed_log_power"] = cl.log_power;
        pass = std::abs(fit.slope - cl.rate) <= tol;
        j["pass"] = pass;
    }
    write_json(out_file(c, "decay.json"), j);
    return c.strict && !pass ? 1 : 0;
}

int verb_lewy(const Common& c) {
    const Config cfg = Config::load(c.config);
    const ScenarioConfig sc = scaled(scenario_from(cfg), c);
    const double delta = cfg.num("delta");
    cfg.check_consumed();
    const Oracle o = oracle_field(sc.oracle, sc.grid());
    const PhaseParams p(sc.oracle.theta, delta);
    const LewyReport r = lewy_roundtrip_check(o.u, p, {o.f, sc.oracle.beta, sc.decay_window});
    write_text(out_file(c, "lewy.json"), to_json(r));
    return c.strict && !r.all_pass() ? 1 : 0;
}

TestFunction make_function(const std::string& kind, double sigma) {
    if (kind == "algebraic") return algebraic_decay(sigma);
    if (kind == "gaussian") return gaussian_bump(1.0 / std::numbers::pi);
    throw ConfigError("function must be algebraic or gaussian");
}

int verb_nonlocal(const Common& c) {
    const Config cfg = Config::load(c.config);
    const std::string op = cfg.str("operator");
    const FracParams p = make_frac_params(cfg.num("s"), cfg.num("quad_r_max", 1e4), cfg.num("quad_tol", 1e-8));
    const TestFunction u1 = make_function(cfg.str("function", "algebraic"), cfg.num("sigma", 1.5));
    const TestFunction u2 = make_function(cfg.str("function2", "algebraic"), cfg.num("sigma2", cfg.num("sigma", 1.5)));
    const auto rr = cfg.list("radii", {10, 100, 9});
    const double angle = cfg.num("angle", 0.0);
    cfg.check_consumed();
    if (rr.size() != 3) throw ConfigError("radii needs lo hi count");

    std::function<double(Point)> fn;
    if (op == "frac_laplacian") {
        fn = [&](Point x) { return frac_laplacian(u1, x, p); };
    } else if (op == "riesz_potential") {
        fn = [&](Point x) { return riesz_potential(u1, x, p); };
    } else if (op == "cross_term") {
        fn = [&](Point x) { return cross_term(u1, u2, x, p); };
    } else {
        throw ConfigError("operator must be frac_laplacian, riesz_potential or cross_term");
    }
    const auto rows = radius_sweep(fn, log_radii(rr[0], rr[1], static_cast<int>(rr[2])), angle);
    std::ofstream csv(out_file(c, "sweep.csv"), std::ios::binary);
    write_sweep_csv(csv, rows);
    write_json(out_file(c, "nonlocal.json"), decay_json(sweep_decay(rows)));
    return 0;
}

int verb_scenario(const Common& c, bool out_given) {
    const Config cfg = Config::load(c.config);
    ScenarioConfig sc = scaled(scenario_from(cfg), c);
    cfg.check_consumed();
    if (out_given) sc.output_dir = c.out;
    const ScenarioReport rep = run_scenario_to_disk(sc);
    for (const Check& ch : rep.checks) {
        std::cout << (ch.pass ? "PASS " : "FAIL ") << ch.name << " value=" << ch.value << " tol=" << ch.tolerance
                  << "\n";
    }
    return c.strict && !rep.all_pass() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exterior-domain Lagrangian mean curvature toolkit"};
    app.require_subcommand(1);
    Common c;
    auto* oracle = app.add_subcommand("oracle", "sample an oracle family: u.field, f.field, truth.json");
    auto* solve = app.add_subcommand("solve", "Newton solve with oracle boundary data: u.field, solve.json");
    auto* fit = app.add_subcommand("fit", "fit A, b, c, d and the flux d of a field: fit.json");
    auto* decay = app.add_subcommand("decay", "decay rate of u minus a model: decay.json");
    auto* lewy = app.add_subcommand("lewy", "Lewy round-trip check on an oracle: lewy.json");
    auto* nonlocal = app.add_subcommand("nonlocal", "radius sweep of a nonlocal operator: sweep.csv, nonlocal.json");
    auto* scenario = app.add_subcommand("scenario", "end-to-end scenario report: <name>.json");
    for (auto* cmd : {oracle, solve, fit, decay, lewy, nonlocal, scenario}) add_common(cmd, c);
    CLI11_PARSE(app, argc, argv);

    try {
        if (*oracle) return verb_oracle(c);
        if (*solve) return verb_solve(c);
        if (*fit) return verb_fit(c);
        if (*decay) return verb_decay(c);
        if (*lewy) return verb_lewy(c);
        if (*nonlocal) return verb_nonlocal(c);
        if (*scenario) return verb_scenario(c, scenario->count("--out") > 0);
    } catch (const Error& e) {
        std::cerr << "lmc: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "lmc: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
