#include "lmc/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "lmc/errors.hpp"

namespace lmc {

void ExteriorProblem::validate() const {
    const auto n_phi = static_cast<std::size_t>(grid.n_phi());
    if (!(f.grid() == grid)) throw ShapeMismatch("f is sampled on a different grid");
    if (inner_bc.size() != n_phi || outer_bc.size() != n_phi) {
        throw ShapeMismatch("boundary data must hold one value per angle");
    }
    for (double fv : f.values()) {
        const double rhs = theta + fv;
        if (!(rhs > 0.0 && rhs < std::numbers::pi)) {
            throw PhaseOutOfRange("theta + f must stay in (0, pi) at every node");
        }
    }
}

ExteriorProblem make_problem(const PolarGrid& grid, double theta, ScalarField f,
                             const std::function<double(double, double)>& boundary, double beta) {
    ExteriorProblem p{grid, theta, std::move(f), {}, {}, beta};
    for (int j = 0; j < grid.n_phi(); ++j) {
        const Point in = grid.node(0, j);
        const Point out = grid.node(grid.n_r() - 1, j);
        p.inner_bc.push_back(boundary(in.x, in.y));
        p.outer_bc.push_back(boundary(out.x, out.y));
    }
    p.validate();
    return p;
}

ScalarField residual(const ScalarField& u, const ExteriorProblem& p) {
    if (!(u.grid() == p.grid) || !(p.f.grid() == p.grid)) {
        throw ShapeMismatch("solution, data and problem grids differ");
    }
    const HessianField h = hessian(u);
    ScalarField out(p.grid);
    for (int i = 1; i + 1 < p.grid.n_r(); ++i) {
        for (int j = 0; j < p.grid.n_phi(); ++j) {
            out.at(i, j) = phase(h.at(i, j)) - p.theta - p.f.at(i, j);
        }
    }
    return out;
}

namespace {

void impose_boundary(ScalarField& u, const ExteriorProblem& p) {
    const int last = p.grid.n_r() - 1;
    for (int j = 0; j < p.grid.n_phi(); ++j) {
        u.at(0, j) = p.inner_bc[static_cast<std::size_t>(j)];
        u.at(last, j) = p.outer_bc[static_cast<std::size_t>(j)];
    }
}

Eigen::SparseMatrix<double> assemble_jacobian(const ScalarField& u, const ExteriorProblem& p) {
    const PolarGrid& g = p.grid;
    const HessianField h = hessian(u);
    const int n_phi = g.n_phi();
    const int n_int = (g.n_r() - 2) * n_phi;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n_int) * 40);
    for (int i = 1; i + 1 < g.n_r(); ++i) {
        for (int j = 0; j < n_phi; ++j) {
            const Sym2 a = phase_gradient(h.at(i, j));
            const int row = (i - 1) * n_phi + j;
            for (const HessianTap& tap : hessian_stencil(g, i, j)) {
                const int ti = static_cast<int>(tap.index / static_cast<std::size_t>(n_phi));
                if (ti == 0 || ti == g.n_r() - 1) continue;
                const int tj = static_cast<int>(tap.index % static_cast<std::size_t>(n_phi));
                const double coef = a.a11 * tap.weight.a11 + 2.0 * a.a12 * tap.weight.a12 +
                                    a.a22 * tap.weight.a22;
                trips.emplace_back(row, (ti - 1) * n_phi + tj, coef);
            }
        }
    }
    Eigen::SparseMatrix<double> jac(n_int, n_int);
    jac.setFromTriplets(trips.begin(), trips.end());
    jac.makeCompressed();
    return jac;
}

}  // namespace

NewtonResult newton_solve(const ExteriorProblem& p, const ScalarField& u0, const NewtonOptions& opts) {
    p.validate();
    if (!(u0.grid() == p.grid)) throw ShapeMismatch("initial guess lives on a different grid");
    const PolarGrid& g = p.grid;
    const int n_phi = g.n_phi();
    const int n_int = (g.n_r() - 2) * n_phi;

    ScalarField u = u0;
    impose_boundary(u, p);
    ScalarField res = residual(u, p);
    double norm = res.sup_norm();
    if (!std::isfinite(norm)) throw InvalidArgument("residual of the initial guess is not finite");

    NewtonResult out{u, {}};
    out.report.residual_history.push_back(norm);

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    bool pattern_ready = false;
    while (norm >= opts.tolerance && out.report.iterations < opts.max_iterations) {
        const Eigen::SparseMatrix<double> jac = assemble_jacobian(u, p);
        if (!pattern_ready) {
            lu.analyzePattern(jac);
            pattern_ready = true;
        }
        lu.factorize(jac);
        if (lu.info() != Eigen::Success) {
            throw LinearSolveFailure("sparse LU factorization failed: " + lu.lastErrorMessage());
        }
        Eigen::VectorXd rhs(n_int);
        for (int k = 0; k < n_int; ++k) rhs[k] = -res.values()[static_cast<std::size_t>(k + n_phi)];
        const Eigen::VectorXd step = lu.solve(rhs);
        if (lu.info() != Eigen::Success || !step.allFinite()) {
            throw LinearSolveFailure("sparse LU solve failed");
        }

        double alpha = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= opts.max_halvings; ++halving) {
            ScalarField trial = u;
            for (int k = 0; k < n_int; ++k) {
                trial.values()[static_cast<std::size_t>(k + n_phi)] += alpha * step[k];
            }
            ScalarField trial_res = residual(trial, p);
            const double trial_norm = trial_res.sup_norm();
            if (std::isfinite(trial_norm) && trial_norm < norm) {
                u = std::move(trial);
                res = std::move(trial_res);
                norm = trial_norm;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
        ++out.report.iterations;
        out.report.residual_history.push_back(norm);
    }
    out.report.converged = norm < opts.tolerance;
    out.u = std::move(u);
    return out;
}

void require_converged(const NewtonResult& result) {
    if (!result.report.converged) {
        const double last = result.report.residual_history.empty()
                                ? 0.0
                                : result.report.residual_history.back();
        throw DidNotConverge("Newton stopped after " + std::to_string(result.report.iterations) +
                             " iterations at residual " + std::to_string(last));
    }
}

ScalarField harmonic_extension(const PolarGrid& grid, const std::vector<double>& inner,
                               const std::vector<double>& outer) {
    const int n = grid.n_phi();
    if (inner.size() != static_cast<std::size_t>(n) || outer.size() != static_cast<std::size_t>(n)) {
        throw ShapeMismatch("boundary data must hold one value per angle");
    }
    using cd = std::complex<double>;
    std::vector<cd> ci(static_cast<std::size_t>(n)), co(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        cd ai = 0.0, ao = 0.0;
        for (int j = 0; j < n; ++j) {
            const cd e = std::polar(1.0, -k * grid.angle(j));
            ai += inner[static_cast<std::size_t>(j)] * e;
            ao += outer[static_cast<std::size_t>(j)] * e;
        }
        ci[static_cast<std::size_t>(k)] = ai / static_cast<double>(n);
        co[static_cast<std::size_t>(k)] = ao / static_cast<double>(n);
    }
    const double r0 = grid.r_min();
    const double r1 = grid.r_max();
    const double l0 = std::log(r0);
    const double l1 = std::log(r1);
    ScalarField out(grid);
    for (int i = 0; i < grid.n_r(); ++i) {
        const double r = grid.radius(i);
        // Radial factor per mode: mode 0 interpolates linearly in ln r, mode k
        // combines (r/r1)^k and (r0/r)^k normalized to stay bounded.
        std::vector<cd> coef(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const int kk = std::min(k, n - k);
            const auto kz = static_cast<std::size_t>(k);
            if (kk == 0) {
                const double t = (std::log(r) - l0) / (l1 - l0);
                coef[kz] = (1.0 - t) * ci[kz] + t * co[kz];
                continue;
            }
            const double rho = std::pow(r0 / r1, kk);
            const double grow = std::pow(r / r1, kk);
            const double decay = std::pow(r0 / r, kk);
            // a ρ + b = inner, a + b ρ = outer.
            const double det = rho * rho - 1.0;
            const cd a = (ci[kz] * rho - co[kz]) / det;
            const cd b = (co[kz] * rho - ci[kz]) / det;
            coef[kz] = a * grow + b * decay;
        }
        for (int j = 0; j < n; ++j) {
            cd acc = 0.0;
            for (int k = 0; k < n; ++k) acc += coef[static_cast<std::size_t>(k)] * std::polar(1.0, k * grid.angle(j));
            out.at(i, j) = acc.real();
        }
    }
    return out;
}

ScalarField default_initial_guess(const ExteriorProblem& p) {
    const double a = std::tan(0.5 * p.theta);
    const PolarGrid& g = p.grid;
    std::vector<double> in(p.inner_bc), out(p.outer_bc);
    const double q0 = 0.5 * a * g.r_min() * g.r_min();
    const double q1 = 0.5 * a * g.r_max() * g.r_max();
    for (auto& v : in) v -= q0;
    for (auto& v : out) v -= q1;
    ScalarField u = harmonic_extension(g, in, out);
    for (int i = 0; i < g.n_r(); ++i) {
        const double q = 0.5 * a * g.radius(i) * g.radius(i);
        for (int j = 0; j < g.n_phi(); ++j) u.at(i, j) += q;
    }
    return u;
}

RadialProfile radial_solve(double theta, const std::function<double(double)>& f, double r0,
                           double slope0, double value0, const std::vector<double>& at,
                           const RadialSolveOptions& opts) {
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 2>;  // {u − ½ a r², u′ − a r}
    if (!(r0 > 0.0)) throw InvalidArgument("radial_solve needs r0 > 0");
    if (at.empty() || !std::is_sorted(at.begin(), at.end()) || at.front() < r0) {
        throw InvalidArgument("sample radii must be increasing and >= r0");
    }
    const double a = std::tan(0.5 * theta);
    const double lim = 0.5 * std::numbers::pi - 1e-6;

    auto rhs = [&](const State& s, State& ds, double r) {
        const double arg = theta + f(r) - std::atan(a + s[1] / r);
        if (!(arg > -lim && arg < lim)) {
            throw PhaseOutOfRange("tangent argument left (-pi/2, pi/2) at r = " + std::to_string(r));
        }
        ds[0] = s[1];
        ds[1] = std::tan(arg) - a;
    };

    State s{value0 - 0.5 * a * r0 * r0, slope0 - a * r0};
    std::vector<double> times;
    times.reserve(at.size() + 1);
    const bool lead = at.front() > r0;
    if (lead) times.push_back(r0);
    times.insert(times.end(), at.begin(), at.end());

    RadialProfile prof;
    auto observe = [&](const State& st, double r) {
        prof.r.push_back(r);
        prof.remainder.push_back(st[0]);
        prof.u.push_back(0.5 * a * r * r + st[0]);
        prof.du.push_back(a * r + st[1]);
    };
    auto stepper = ode::make_dense_output(opts.abs_tol, opts.rel_tol, ode::runge_kutta_dopri5<State>());
    const double dt0 = 1e-3 * r0;
    ode::integrate_times(stepper, rhs, s, times.begin(), times.end(), dt0, observe);
    // The first observation is the initial point r0 itself.
    if (lead) {
        prof.r.erase(prof.r.begin());
        prof.u.erase(prof.u.begin());
        prof.du.erase(prof.du.begin());
        prof.remainder.erase(prof.remainder.begin());
    }
    return prof;
}

}  // namespace lmc
