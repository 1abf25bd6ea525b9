#pragma once

// Closed-form oracle families, the scenario runner and its configuration, the
// Lewy round-trip check on sampled solutions.
//
//   u0 = ½a|x|² + d ln|x| + (d/2) ln(1+a²) + c + |x|^{2−β}            β > 2
//   u1 = ½a|x|² + d ln|x| + (d/2) ln(1+a²) + c + (x1+x2) ln|x| / |x|²  β = 3
//   u2 = ½a|x|² + (x1+x2) ln|x|                                        β = 1
//   u3 radial, solving the equation with f = |x|^{−β}                   0 < β ≤ 2
//
// with a = tan(θ/2). Grids must stay in |x| > 2.

#include <functional>
#include <iosfwd>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lmc/asymptotics.hpp"
#include "lmc/fields.hpp"
#include "lmc/phase.hpp"
#include "lmc/solver.hpp"

namespace lmc {

enum class Family { u0, u1, u2, u3 };

std::string to_string(Family f);
Family parse_family(const std::string& s);

struct OracleSpec {
    Family family = Family::u0;
    double theta = std::numbers::pi / 2;
    double beta = 2.5;
    double d = 0.0;  // u0, u1 only
    double c = 0.0;  // u0, u1 only

    /// Throws InvalidArgument when β does not fit the family or θ ∉ (0, π).
    void validate() const;
};

/// f(x) in closed form (u3: |x|^{−β}).
double oracle_f(const OracleSpec& spec, Point x);

struct Oracle {
    ScalarField u;
    ScalarField f;
    Expansion truth;
    RemainderClaim claim;
};

/// Throws DomainTooSmall when r_min ≤ 2. For u3 the profile comes from
/// radial_solve started at r_min on the linearized particular solution
/// (1+a²)r^{2−β}/(2−β)², or (1+a²)(ln r)²/2 at β = 2, corrected so the
/// remainder carries no d′ ln r + c′ part (β > 1).
Oracle oracle_field(const OracleSpec& spec, const PolarGrid& grid);

// ---------------------------------------------------------------------------
// Configuration

/// Flat "key = value" text; '#' starts a comment. Every key must be read
/// before check_consumed, which throws ConfigError naming the leftovers.
class Config {
public:
    static Config parse(std::istream& is);
    static Config load(const std::string& path);

    [[nodiscard]] bool has(const std::string& key) const;
    std::string str(const std::string& key) const;
    std::string str(const std::string& key, const std::string& fallback) const;
    double num(const std::string& key) const;
    double num(const std::string& key, double fallback) const;
    int integer(const std::string& key, int fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    /// Whitespace- or comma-separated numbers.
    std::vector<double> list(const std::string& key, std::vector<double> fallback) const;

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    void check_consumed() const;

private:
    std::map<std::string, std::string> kv_;
    mutable std::set<std::string> used_;
};

struct Tolerances {
    double A = 1e-3;          // max entry error of fit_A
    double d_flux = 1e-3;     // |d_from_flux − d|
    double d_fit = 1e-2;      // |fit_bcd.d − d| / |d|
    double slope = 0.05;      // decay slope against the claim
    double ratio_band = 3.0;  // max/min of the normalized remainder
};

struct ScenarioConfig {
    std::string name = "scenario";
    OracleSpec oracle;
    double r_min = 2.5;
    double r_max = 1000.0;
    int n_r = 257;
    int n_phi = 64;
    std::optional<Window> fit_window;    // default_window when absent
    std::vector<double> flux_radii{10.0, 30.0, 100.0};
    Window decay_window{10.0, 1000.0};
    int decay_points = 9;
    bool solve = false;                  // re-solve with oracle boundary data
    Tolerances tol;
    std::string output_dir = ".";

    [[nodiscard]] PolarGrid grid() const { return PolarGrid(r_min, r_max, n_r, n_phi); }
    /// Throws ConfigError unless every radius and window lies in the annulus.
    void validate() const;
};

/// Reads the scenario keys from cfg (leaves other keys unconsumed).
ScenarioConfig scenario_from(const Config& cfg);
OracleSpec oracle_from(const Config& cfg);

struct Check {
    std::string name;
    bool pass;
    double value;
    double tolerance;
};

struct ScenarioReport {
    std::string json;  // deterministic, newline-terminated
    std::vector<Check> checks;
    [[nodiscard]] bool all_pass() const;
};

/// Builds the oracle, optionally re-solves it, runs fit_A, fit_bcd,
/// d_from_flux and estimate_decay on u − truth model, and compares with the
/// truth and with the claimed (σ, μ). Stage errors are recorded in the report
/// as failed checks.
ScenarioReport run_scenario(const ScenarioConfig& cfg);

/// run_scenario plus <output_dir>/<name>.json. Returns the report.
ScenarioReport run_scenario_to_disk(const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// Lewy round trip

struct LewyOptions {
    std::optional<ScalarField> f;   // phase(D²u) − θ from the discrete Hessian when absent
    double beta = 0.0;
    std::optional<Window> decay_window;
    double phase_tol = 1e-10;
    double ratio_band = 3.0;
};

struct LewyReport {
    double min_jacobian = 0.0;       // min det(cI + sD²u)
    bool jacobian_sign_flip = false;
    int flip_i = -1;
    int flip_j = -1;
    double max_rotated_eigenvalue = 0.0;
    double bound = 0.0;              // cot ϑ
    double max_phase_error = 0.0;    // |phase(M̃) − phase(M) + 2ϑ|
    double h_sup = 0.0;
    std::optional<double> ratio_min;  // of sup|h| · |x̃|^β per row
    std::optional<double> ratio_max;

    bool orientation_ok = false;
    bool bound_ok = false;
    bool phase_ok = false;
    bool decay_ok = false;
    [[nodiscard]] bool all_pass() const { return orientation_ok && bound_ok && phase_ok && decay_ok; }
};

/// x̃ = cx + sDu at every node (discrete gradient and Hessian). The decay
/// transfer is skipped (and passes) when sup|h| ≤ phase_tol.
LewyReport lewy_roundtrip_check(const ScalarField& u, const PhaseParams& p, const LewyOptions& opts = {});

std::string to_json(const LewyReport& r);

// ---------------------------------------------------------------------------
// Solve

struct SolveOutcome {
    NewtonResult result;
    double error_linf = 0.0;  // against the oracle
};

/// Newton solve of the oracle's Dirichlet problem from the default initial guess.
SolveOutcome solve_oracle(const Oracle& o, const OracleSpec& spec, const NewtonOptions& opts = {});

}  // namespace lmc
