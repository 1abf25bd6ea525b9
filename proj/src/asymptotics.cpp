#include "lmc/asymptotics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "lmc/errors.hpp"

namespace lmc {

namespace {

constexpr double kPi = std::numbers::pi;

// tr(P Q) for symmetric P, Q.
double contract(const Sym2& p, const Sym2& q) {
    return p.a11 * q.a11 + 2.0 * p.a12 * q.a12 + p.a22 * q.a22;
}

std::vector<int> rows_in(const PolarGrid& g, Window w) {
    std::vector<int> rows;
    for (int i = 0; i < g.n_r(); ++i) {
        const double r = g.radius(i);
        if (r >= w.r_lo * (1 - 1e-12) && r <= w.r_hi * (1 + 1e-12)) rows.push_back(i);
    }
    return rows;
}

}  // namespace

double Expansion::model(double x, double y) const {
    const Sym2 q = Sym2::identity() + square(A);
    return 0.5 * A.quad(x, y) + b[0] * x + b[1] * y + 0.5 * d * std::log(q.quad(x, y)) + c;
}

RemainderClaim claimed_remainder(double beta) {
    if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
    if (beta > 2.0) return {-std::min(1.0, beta - 2.0), beta == 3.0 ? 1 : 0, false};
    const int fl = static_cast<int>(std::floor(beta));
    return {2.0 - beta, beta <= 1.0 ? fl : 2 * (fl - 1), true};
}

ScalarField remainder_field(const ScalarField& u, const Expansion& e) {
    return u - ScalarField::sample(u.grid(), [&](double x, double y) { return e.model(x, y); });
}

Window default_window(const PolarGrid& grid) {
    const int last = std::max(0, grid.n_r() - 4);
    const double hi = grid.radius(last);
    return {std::max(grid.r_min(), hi / 10.0), hi};
}

Sym2 fit_A(const ScalarField& u, Window w) {
    const PolarGrid& g = u.grid();
    const auto rows = rows_in(g, w);
    if (rows.size() < 3) throw WindowTooSmall("fit_A needs at least three radial rows in the window");
    const HessianField h = hessian(u);
    Sym2 acc;
    double weight = 0.0;
    for (int i : rows) {
        // Each node of a log-polar grid covers an area proportional to r².
        const double r = g.radius(i);
        for (int j = 0; j < g.n_phi(); ++j) acc += h.at(i, j) * (r * r);
        weight += r * r * g.n_phi();
    }
    acc *= 1.0 / weight;
    return acc;
}

BcdFit fit_bcd(const ScalarField& u, const Sym2& A, Window w, std::optional<RemainderTerm> extra) {
    const PolarGrid& g = u.grid();
    const auto rows = rows_in(g, w);
    const int cols = extra ? 5 : 4;
    const auto n = static_cast<Eigen::Index>(rows.size()) * g.n_phi();
    if (n < cols) throw WindowTooSmall("fit_bcd window holds too few nodes");
    const Sym2 q = Sym2::identity() + square(A);
    Eigen::MatrixXd x(n, cols);
    Eigen::VectorXd y(n);
    Eigen::Index k = 0;
    for (int i : rows) {
        const double r = g.radius(i);
        for (int j = 0; j < g.n_phi(); ++j, ++k) {
            const Point p = g.node(i, j);
            x(k, 0) = p.x;
            x(k, 1) = p.y;
            x(k, 2) = 1.0;
            x(k, 3) = 0.5 * std::log(q.quad(p.x, p.y));
            if (extra) x(k, 4) = std::pow(r, extra->rate) * std::pow(std::log(r), extra->log_power);
            y(k) = u.at(i, j) - 0.5 * A.quad(p.x, p.y);
        }
    }
    const Eigen::VectorXd scale = x.colwise().norm().transpose();
    if ((scale.array() == 0.0).any()) throw IllConditioned("fit_bcd basis column vanishes on the window");
    const Eigen::MatrixXd xs = x * scale.cwiseInverse().asDiagonal();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xs.transpose() * xs);
    const double cond = eig.eigenvalues().maxCoeff() / std::max(eig.eigenvalues().minCoeff(), 0.0);
    if (!(cond <= 1e10)) throw IllConditioned("fit_bcd normal equations have condition " + std::to_string(cond));
    const Eigen::VectorXd coef = xs.colPivHouseholderQr().solve(y).cwiseQuotient(scale);

    BcdFit out;
    out.b = {coef(0), coef(1)};
    out.c = coef(2);
    out.d = coef(3);
    out.condition = cond;
    out.rms = std::sqrt((x * coef - y).squaredNorm() / static_cast<double>(n));
    if (extra) out.remainder_coef = coef(4);
    return out;
}

FluxD flux_d(const ScalarField& u, const Sym2& A, double r) {
    const PolarGrid& g = u.grid();
    const Sym2 q = Sym2::identity() + square(A);
    const Sym2 qi = inverse(q);
    const double pref = std::sqrt(q.det()) / (2.0 * kPi);
    const double hphi = g.angle_step();

    auto circle_flux = [&](double rho) {
        const CircleSamples cs = circle_samples(u, rho);
        double acc = 0.0;
        for (int j = 0; j < g.n_phi(); ++j) {
            const auto jj = static_cast<std::size_t>(j);
            const auto [vx, vy] = qi.apply(cs.ux[jj], cs.uy[jj]);
            acc += std::cos(g.angle(j)) * vx + std::sin(g.angle(j)) * vy;
        }
        return acc * rho * hphi;
    };
    const double tqa = contract(qi, A) * kPi;

    FluxD out;
    out.boundary = circle_flux(r);
    out.area = tqa * r * r;

    // Exterior integral. Up to R*, the last circle with two nodes outside it,
    // the angular integral of Q⁻¹:D²u is the ρ-derivative of the circle flux,
    // so that part is a flux difference. Beyond R* the angular density times ρ²
    // is fitted as a power law in ρ on the outer decade of interior rows (the
    // three boundary rows use one-sided stencils) and integrated analytically.
    const int last = g.n_r() - 3;
    const double r_star = g.radius(last);
    if (r < r_star) out.volume = (circle_flux(r_star) - tqa * r_star * r_star) - (out.boundary - out.area);

    const HessianField h = hessian(u);
    std::vector<int> outer;
    std::vector<double> dens;
    for (int i = 0; i < last; ++i) {
        const double rho = g.radius(i);
        if (rho < r_star / 10.0) continue;
        double s = 0.0;
        for (int j = 0; j < g.n_phi(); ++j) s += contract(qi, h.at(i, j) - A);
        outer.push_back(i);
        dens.push_back(s * hphi * rho * rho);
    }
    const bool same_sign = !dens.empty() && std::all_of(dens.begin(), dens.end(), [&](double v) {
        return v * dens.front() > 0.0;
    });
    if (outer.size() >= 4 && same_sign) {
        const double t_star = std::log(std::max(r, r_star));
        Eigen::MatrixXd x(static_cast<Eigen::Index>(outer.size()), 2);
        Eigen::VectorXd y(x.rows());
        for (Eigen::Index k = 0; k < x.rows(); ++k) {
            const auto kk = static_cast<std::size_t>(k);
            x(k, 0) = 1.0;
            x(k, 1) = std::log(g.radius(outer[kk])) - t_star;
            y(k) = std::log(std::abs(dens[kk]));
        }
        const Eigen::Vector2d c = x.colPivHouseholderQr().solve(y);
        out.tail_rate = c(1);
        if (c(1) < -0.05) {
            out.tail = std::copysign(std::exp(c(0)), dens.front()) / -c(1);
            out.tail_closed = true;
        }
    }
    out.circle_only_d = pref * (out.boundary - out.area);
    out.d = pref * (out.boundary - out.area + out.volume + out.tail);
    return out;
}

double d_from_flux(const ScalarField& u, const Sym2& A, double r) { return flux_d(u, A, r).d; }

bool HarmonicFit::any_growth() const {
    return std::any_of(modes.begin(), modes.end(), [](const ModeAmplitude& m) { return m.growth_flag; });
}

HarmonicFit harmonic_fit(const ScalarField& u, double r1, double r2, int k_max) {
    if (std::abs(r1 - r2) <= 1e-12 * std::max(std::abs(r1), std::abs(r2))) {
        throw DegenerateRadii("harmonic_fit needs two distinct radii");
    }
    if (r1 > r2) std::swap(r1, r2);
    k_max = std::max(k_max, 1);
    const PolarGrid& g = u.grid();
    const auto m1 = circle_modes(u, r1, k_max);
    const auto m2 = circle_modes(u, r2, k_max);

    const ScalarField lap = laplacian(u);
    double scale = 1.0;
    double worst = 0.0;
    for (int i = 0; i < g.n_r(); ++i) {
        const double r = g.radius(i);
        if (r < r1 || r > r2) continue;
        for (int j = 0; j < g.n_phi(); ++j) {
            scale = std::max(scale, std::abs(u.at(i, j)));
            worst = std::max(worst, r * r * std::abs(lap.at(i, j)));
        }
    }
    if (worst > 1e-6 * scale) {
        throw NotHarmonic("r²|Δu| reaches " + std::to_string(worst) + " against scale " + std::to_string(scale));
    }

    using cd = std::complex<double>;
    HarmonicFit out;
    // Mode 0: c + d ln r.
    const double l1 = std::log(r1), l2 = std::log(r2);
    out.d = (m2[0].real() - m1[0].real()) / (l2 - l1);
    out.c = m1[0].real() - out.d * l1;
    // Mode k: α r^k + γ r^{−k}, solved in the scaled unknowns α r2^k and γ r1^{−k}.
    auto solve = [&](int k) {
        const double rho = std::pow(r1 / r2, k);
        const auto kz = static_cast<std::size_t>(k);
        const double det = 1.0 - rho * rho;
        const cd grow = (m2[kz] - rho * m1[kz]) / det;  // α r2^k
        const cd decay = (m1[kz] - rho * m2[kz]) / det; // γ r1^{−k}
        return std::pair{grow / std::pow(r2, k), decay * std::pow(r1, k)};
    };
    const auto [a1, g1] = solve(1);
    // u ⊃ b1 x1 + b2 x2 = r Re((b1 − i b2) e^{iφ}), so c_1 = (b1 − i b2)/2.
    out.b = {2.0 * a1.real(), -2.0 * a1.imag()};
    out.mode1_decaying = {2.0 * g1.real(), -2.0 * g1.imag()};
    for (int k = 2; k <= k_max; ++k) {
        const auto [ak, gk] = solve(k);
        ModeAmplitude m{k, 2.0 * std::abs(ak), 2.0 * std::abs(gk), false};
        m.growth_flag = m.growing * std::pow(r2, k) > 1e-8 * scale;
        out.modes.push_back(m);
    }
    return out;
}

double circle_sup(const ScalarField& w, double r) {
    const auto v = circle_values(w, r);
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

DecayFit estimate_decay(std::span<const double> r, std::span<const double> m) {
    if (r.size() != m.size()) throw ShapeMismatch("radii and samples differ in length");
    if (r.size() < 5) throw WindowTooSmall("estimate_decay needs at least five radii");
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    if (*hi < 10.0 * *lo * (1 - 1e-12)) throw WindowTooSmall("estimate_decay radii must span a decade");
    if (!(*lo > 1.0)) throw InvalidArgument("estimate_decay radii must exceed 1");
    const auto n = static_cast<Eigen::Index>(r.size());
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double rk = r[static_cast<std::size_t>(k)];
        const double mk = m[static_cast<std::size_t>(k)];
        if (!(mk > 0.0) || !std::isfinite(mk)) throw InvalidArgument("decay samples must be positive and finite");
        x(k, 0) = 1.0;
        x(k, 1) = std::log(rk);
        x(k, 2) = std::log(std::log(rk));
        y(k) = std::log(mk);
    }
    const Eigen::Vector3d c = x.colPivHouseholderQr().solve(y);
    DecayFit out;
    out.slope = c(1);
    out.log_power = c(2);
    out.r_lo = *lo;
    out.r_hi = *hi;
    out.fit_residual = std::sqrt((x * c - y).squaredNorm() / static_cast<double>(n));
    return out;
}

DecayFit estimate_decay(const ScalarField& w, const std::vector<double>& radii) {
    std::vector<double> m;
    m.reserve(radii.size());
    for (double r : radii) m.push_back(circle_sup(w, r));
    return estimate_decay(std::span<const double>(radii), std::span<const double>(m));
}

Sym2 project_admissible(const Sym2& a, double theta) {
    if (!(theta > 0.0 && theta < std::numbers::pi)) throw PhaseOutOfRange("theta must lie in (0, pi)");
    const Sym2 g = phase_gradient(a);
    double t = 0.0;
    double r = phase(a) - theta;
    for (int it = 0; it < 50 && std::abs(r) > 1e-15; ++it) {
        const Sym2 gm = phase_gradient(a + g * t);
        t -= r / (gm.a11 * g.a11 + 2 * gm.a12 * g.a12 + gm.a22 * g.a22);
        if (!std::isfinite(t)) break;
        r = phase(a + g * t) - theta;
    }
    if (!(std::abs(r) <= 1e-13)) throw DidNotConverge("project_admissible did not converge");
    return a + g * t;
}

std::vector<double> log_radii(double lo, double hi, int n) {
    if (!(lo > 0.0 && hi > lo) || n < 2) throw InvalidArgument("log_radii needs 0 < lo < hi and n >= 2");
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1)));
    out.back() = hi;
    return out;
}

}  // namespace lmc
