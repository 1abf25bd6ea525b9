#pragma once

// Discrete Dirichlet solver for arctan λ1(D²u) + arctan λ2(D²u) = θ + f(x) on
// an annulus, and the ODE reduction for rotationally symmetric data.

#include <functional>
#include <vector>

#include "lmc/fields.hpp"

namespace lmc {

struct ExteriorProblem {
    PolarGrid grid;
    double theta;
    ScalarField f;
    std::vector<double> inner_bc;  // u on |x| = r_min, one value per angle
    std::vector<double> outer_bc;  // u on |x| = r_max
    double beta = 0.0;             // decay exponent of f, reporting only

    /// Throws ShapeMismatch on size errors and PhaseOutOfRange unless
    /// θ + f ∈ (0, π) at every node.
    void validate() const;
};

/// Boundary rows of an exterior problem taken from a closed-form function.
ExteriorProblem make_problem(const PolarGrid& grid, double theta, ScalarField f,
                             const std::function<double(double, double)>& boundary, double beta);

struct NewtonReport {
    int iterations = 0;
    std::vector<double> residual_history;  // sup-norm, entry 0 is the initial guess
    bool converged = false;
};

struct NewtonResult {
    ScalarField u;
    NewtonReport report;
};

struct NewtonOptions {
    double tolerance = 1e-10;
    int max_iterations = 50;
    int max_halvings = 20;
};

/// phase(D²u) − θ − f at interior rows, zero on the two boundary rows.
ScalarField residual(const ScalarField& u, const ExteriorProblem& p);

/// Damped Newton with the exact linearization a_ij ∂_ij, a = (I + (D²u)²)⁻¹.
/// Boundary rows of u0 are replaced by the problem's Dirichlet data. A run that
/// misses the tolerance returns the best iterate with converged = false; call
/// require_converged to turn that into DidNotConverge. Throws
/// LinearSolveFailure when the sparse factorization fails.
NewtonResult newton_solve(const ExteriorProblem& p, const ScalarField& u0,
                          const NewtonOptions& opts = {});

void require_converged(const NewtonResult& result);

/// Harmonic function on the annulus with the given values on both circles,
/// built mode by mode from {1, ln r} and {r^k, r^−k}.
ScalarField harmonic_extension(const PolarGrid& grid, const std::vector<double>& inner,
                               const std::vector<double>& outer);

/// ½ tan(θ/2) |x|² plus the harmonic correction matching the boundary data.
ScalarField default_initial_guess(const ExteriorProblem& p);

// ---------------------------------------------------------------------------
// Radial reduction

struct RadialProfile {
    std::vector<double> r;
    std::vector<double> u;
    std::vector<double> du;
    /// u − ½ tan(θ/2) r², integrated directly to avoid cancellation.
    std::vector<double> remainder;
};

struct RadialSolveOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
};

/// Integrates u″ = tan(θ + f(r) − arctan(u′/r)) from (r0, u′(r0) = slope0,
/// u(r0) = value0) and samples the solution at the increasing radii `at`
/// (all in [r0, ∞)). The state carried is the deviation from the invariant ray
/// u′ = tan(θ/2) r. Throws PhaseOutOfRange when the tangent argument leaves
/// (−π/2 + 1e−6, π/2 − 1e−6).
RadialProfile radial_solve(double theta, const std::function<double(double)>& f, double r0,
                           double slope0, double value0, const std::vector<double>& at,
                           const RadialSolveOptions& opts = {});

}  // namespace lmc
