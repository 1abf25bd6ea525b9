#include "lmc/nonlocal.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <cmath>
#include <memory>
#include <numbers>
#include <ostream>

#include "lmc/errors.hpp"

namespace lmc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInnerLaplacian = 1e-4;  // inner cutoff for the hypersingular kernels
constexpr double kInnerRiesz = 1e-6;
constexpr double kNearRatio = 1.2;        // panel growth, x-centred radii
constexpr double kFarRatio = 1.1;         // panel growth, origin-centred radii
constexpr double kFarStart = 0.05;
constexpr int kNearAngles = 64;           // over [0, π); the integrands are even in z
constexpr int kFarAngles = 256;

struct Rule {
    std::vector<double> x;  // on [−1, 1]
    std::vector<double> w;
};

const Rule& gauss8() {
    static const Rule rule = [] {
        using G = boost::math::quadrature::gauss<double, 8>;
        Rule r;
        for (std::size_t k = 0; k < G::abscissa().size(); ++k) {
            r.x.push_back(-G::abscissa()[k]);
            r.w.push_back(G::weights()[k]);
            r.x.push_back(G::abscissa()[k]);
            r.w.push_back(G::weights()[k]);
        }
        return r;
    }();
    return rule;
}

// Smooth cutoff: 1 on [0, ½], 0 on [1, ∞).
double chi(double t) {
    if (t <= 0.5) return 1.0;
    if (t >= 1.0) return 0.0;
    const double tau = 2.0 * t - 1.0;
    const double a = std::exp(-1.0 / (1.0 - tau));
    const double b = std::exp(-1.0 / tau);
    return a / (a + b);
}

double cutoff_radius(Point x) { return std::max(1.0, 0.5 * std::hypot(x.x, x.y)); }

// Radial nodes t = ln ρ and weights over [ln lo, ln hi] on log panels.
struct Nodes {
    std::vector<double> r;
    std::vector<double> w;  // weight for ∫ g dρ
};

Nodes log_nodes(double lo, double hi, double ratio) {
    const Rule& g = gauss8();
    Nodes out;
    const double span = std::log(hi / lo);
    const int panels = std::max(1, static_cast<int>(std::ceil(span / std::log(ratio))));
    const double h = span / panels;
    for (int m = 0; m < panels; ++m) {
        const double a = std::log(lo) + m * h;
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            const double t = a + 0.5 * h * (1.0 + g.x[q]);
            const double r = std::exp(t);
            out.r.push_back(r);
            out.w.push_back(0.5 * h * g.w[q] * r);
        }
    }
    return out;
}

Nodes far_nodes(double r_max) {
    const Rule& g = gauss8();
    Nodes out;
    for (std::size_t q = 0; q < g.x.size(); ++q) {
        out.r.push_back(0.5 * kFarStart * (1.0 + g.x[q]));
        out.w.push_back(0.5 * kFarStart * g.w[q]);
    }
    const Nodes rest = log_nodes(kFarStart, r_max, kFarRatio);
    out.r.insert(out.r.end(), rest.r.begin(), rest.r.end());
    out.w.insert(out.w.end(), rest.w.begin(), rest.w.end());
    return out;
}

// ∫_{|z|<ρ0} χ(|z|/ρ0) q(z) |z|^{−κ} dz for q even in z, from ρ = lo.
template <class Q>
double near_integral(double rho0, double lo, double kappa, Q&& q) {
    const Nodes n = log_nodes(lo, rho0, kNearRatio);
    const double da = kPi / kNearAngles;
    std::array<double, kNearAngles> ca{}, sa{};
    for (int j = 0; j < kNearAngles; ++j) {
        ca[static_cast<std::size_t>(j)] = std::cos(j * da);
        sa[static_cast<std::size_t>(j)] = std::sin(j * da);
    }
    double total = 0.0;
    for (std::size_t k = 0; k < n.r.size(); ++k) {
        const double rho = n.r[k];
        const double wgt = chi(rho / rho0);
        if (wgt == 0.0) continue;
        double ring = 0.0;
        for (int j = 0; j < kNearAngles; ++j) {
            ring += q(rho * ca[static_cast<std::size_t>(j)], rho * sa[static_cast<std::size_t>(j)]);
        }
        total += n.w[k] * wgt * std::pow(rho, 1.0 - kappa) * ring * 2.0 * da;
    }
    return total;
}

// ∫_{|y|<R} (1 − χ(|y−x|/ρ0)) g_i(y) |x−y|^{−κ} dy for several g_i at once.
template <std::size_t N, class G>
std::array<double, N> far_integrals(Point x, double rho0, double r_max, double kappa, G&& g) {
    static thread_local std::unique_ptr<std::pair<double, Nodes>> cache;
    if (!cache || cache->first != r_max) cache = std::make_unique<std::pair<double, Nodes>>(r_max, far_nodes(r_max));
    const Nodes& n = cache->second;
    const double da = 2.0 * kPi / kFarAngles;
    static thread_local std::vector<double> ca, sa;
    if (ca.empty()) {
        for (int j = 0; j < kFarAngles; ++j) {
            ca.push_back(std::cos(j * da));
            sa.push_back(std::sin(j * da));
        }
    }
    std::array<double, N> total{};
    for (std::size_t k = 0; k < n.r.size(); ++k) {
        const double rho = n.r[k];
        std::array<double, N> ring{};
        for (std::size_t j = 0; j < ca.size(); ++j) {
            const double yx = rho * ca[j], yy = rho * sa[j];
            const double dist = std::hypot(yx - x.x, yy - x.y);
            const double wgt = 1.0 - chi(dist / rho0);
            if (wgt == 0.0) continue;
            const double ker = wgt * std::pow(dist, -kappa);
            const std::array<double, N> v = g(yx, yy);
            for (std::size_t i = 0; i < N; ++i) ring[i] += ker * v[i];
        }
        for (std::size_t i = 0; i < N; ++i) total[i] += n.w[k] * rho * da * ring[i];
    }
    return total;
}

// ∫_{|y|>R} A|y|^{−σ} |x−y|^{−κ} dy, from the circle mean
// ⨍|x−y|^{−κ} = ρ^{−κ} ₂F₁(κ/2, κ/2; 1; |x|²/ρ²).
double tail_integral(const TailModel& t, Point x, double r_max, double kappa) {
    if (t.amplitude == 0.0) return 0.0;
    const double e0 = t.exponent + kappa - 2.0;
    if (!(e0 > 0.0)) throw InvalidArgument("tail model is not integrable against the kernel");
    const double q = (x.x * x.x + x.y * x.y) / (r_max * r_max);
    double coef = 1.0;  // ((κ/2)_k / k!)² q^k
    double sum = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double term = coef / (e0 + 2.0 * k);
        sum += term;
        if (term < 1e-17 * sum) break;
        const double ratio = (0.5 * kappa + k) / (k + 1.0);
        coef *= ratio * ratio * q;
    }
    return 2.0 * kPi * t.amplitude * std::pow(r_max, -e0) * sum;
}

// Tail model to use, or a zero model when the function is negligible at
// quad_r_max. Throws TailModelMissing otherwise.
TailModel resolve_tail(const TestFunction& u, const FracParams& p, double kappa) {
    if (u.tail) return *u.tail;
    double m = 0.0;
    for (int j = 0; j < 64; ++j) {
        const double a = 2.0 * kPi * j / 64;
        m = std::max(m, std::abs(u(p.quad_r_max * std::cos(a), p.quad_r_max * std::sin(a))));
    }
    const double bound = m * 2.0 * kPi * std::pow(p.quad_r_max, 2.0 - kappa) / (kappa - 2.0);
    if (bound > p.quad_tol) {
        throw TailModelMissing("no tail model and |u| = " + std::to_string(m) + " at quad_r_max");
    }
    return {};
}

// ∫_{|y|<R} f dy on the origin-centred nodes.
double plane_integral(const TestFunction& f, double r_max) {
    const Nodes n = far_nodes(r_max);
    const double da = 2.0 * kPi / kFarAngles;
    double total = 0.0;
    for (std::size_t k = 0; k < n.r.size(); ++k) {
        double ring = 0.0;
        for (int j = 0; j < kFarAngles; ++j) ring += f(n.r[k] * std::cos(j * da), n.r[k] * std::sin(j * da));
        total += n.w[k] * n.r[k] * da * ring;
    }
    return total;
}

double laplacian_fd(const TestFunction& u, Point x) {
    const double h = 1e-3;
    return (u(x.x + h, x.y) + u(x.x - h, x.y) + u(x.x, x.y + h) + u(x.x, x.y - h) - 4.0 * u(x.x, x.y)) / (h * h);
}

std::array<double, 2> gradient_of(const TestFunction& u, Point x) {
    if (u.gradient) return u.gradient(x.x, x.y);
    const double h = 1e-5;
    return {(u(x.x + h, x.y) - u(x.x - h, x.y)) / (2 * h), (u(x.x, x.y + h) - u(x.x, x.y - h)) / (2 * h)};
}

}  // namespace

FracParams make_frac_params(double s, double quad_r_max, double quad_tol) {
    if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("s must lie in (0, 1)");
    if (!(quad_r_max > 0.0) || !(quad_tol > 0.0)) throw InvalidArgument("quad_r_max and quad_tol must be positive");
    using boost::math::tgamma;
    const double c = s * std::pow(4.0, s) * tgamma(1.0 + s) / (kPi * tgamma(1.0 - s));
    const double cr = tgamma(1.0 - s) / (std::pow(4.0, s) * kPi * tgamma(s));
    return {s, c, cr, quad_r_max, quad_tol};
}

TestFunction product(const TestFunction& a, const TestFunction& b) {
    TestFunction out;
    out.value = [a, b](double x, double y) { return a(x, y) * b(x, y); };
    if (a.gradient && b.gradient) {
        out.gradient = [a, b](double x, double y) {
            const auto ga = a.gradient(x, y);
            const auto gb = b.gradient(x, y);
            const double va = a(x, y), vb = b(x, y);
            return std::array<double, 2>{ga[0] * vb + va * gb[0], ga[1] * vb + va * gb[1]};
        };
    }
    if (a.tail && b.tail) out.tail = TailModel{a.tail->amplitude * b.tail->amplitude, a.tail->exponent + b.tail->exponent};
    return out;
}

TestFunction gaussian_bump(double amp, Point centre, double width) {
    const double w2 = width * width;
    TestFunction f;
    f.value = [=](double x, double y) {
        const double dx = x - centre.x, dy = y - centre.y;
        return amp * std::exp(-(dx * dx + dy * dy) / w2);
    };
    f.gradient = [=](double x, double y) {
        const double dx = x - centre.x, dy = y - centre.y;
        const double v = amp * std::exp(-(dx * dx + dy * dy) / w2);
        return std::array<double, 2>{-2.0 * dx / w2 * v, -2.0 * dy / w2 * v};
    };
    f.tail = TailModel{};
    return f;
}

TestFunction algebraic_decay(double sigma) {
    TestFunction f;
    f.value = [=](double x, double y) { return std::pow(1.0 + x * x + y * y, -0.5 * sigma); };
    f.gradient = [=](double x, double y) {
        const double k = -sigma * std::pow(1.0 + x * x + y * y, -0.5 * sigma - 1.0);
        return std::array<double, 2>{k * x, k * y};
    };
    f.tail = TailModel{1.0, sigma};
    return f;
}

TestFunction compact_bump(Point centre, double radius) {
    TestFunction f;
    f.value = [=](double x, double y) {
        const double q = ((x - centre.x) * (x - centre.x) + (y - centre.y) * (y - centre.y)) / (radius * radius);
        return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
    };
    f.gradient = [=](double x, double y) {
        const double dx = x - centre.x, dy = y - centre.y;
        const double q = (dx * dx + dy * dy) / (radius * radius);
        if (q >= 1.0) return std::array<double, 2>{0.0, 0.0};
        const double k = -std::exp(1.0 - 1.0 / (1.0 - q)) / ((1.0 - q) * (1.0 - q)) * 2.0 / (radius * radius);
        return std::array<double, 2>{k * dx, k * dy};
    };
    f.tail = TailModel{};
    return f;
}

TestFunction constant_function(double value) {
    TestFunction f;
    f.value = [=](double, double) { return value; };
    f.gradient = [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
    f.tail = TailModel{value, 0.0};
    return f;
}

double gaussian_frac_laplacian(double s, Point x, double amp) {
    const double r2 = x.x * x.x + x.y * x.y;
    return amp * std::pow(4.0, s) * boost::math::tgamma(1.0 + s) * boost::math::hypergeometric_1F1(1.0 + s, 1.0, -r2);
}

double frac_laplacian(const TestFunction& u, Point x, const FracParams& p) {
    const double kappa = 2.0 + 2.0 * p.s;
    const double rho0 = cutoff_radius(x);
    if (p.quad_r_max <= std::hypot(x.x, x.y) + rho0) throw DomainTooSmall("quad_r_max must exceed |x| + ρ0");
    const TailModel tail = resolve_tail(u, p, kappa);
    const double ux = u(x.x, x.y);

    const double eps = kInnerLaplacian;
    double near = near_integral(rho0, eps, kappa, [&](double zx, double zy) {
        return ux - 0.5 * (u(x.x + zx, x.y + zy) + u(x.x - zx, x.y - zy));
    });
    near += -0.5 * laplacian_fd(u, x) * kPi * std::pow(eps, 2.0 - 2.0 * p.s) / (2.0 - 2.0 * p.s);

    // The kernel mass outside the cutoff uses the same nodes as u, so constants
    // cancel to rounding.
    const auto far = far_integrals<2>(x, rho0, p.quad_r_max, kappa, [&](double yx, double yy) {
        return std::array<double, 2>{1.0, u(yx, yy)};
    });
    const double mass = far[0] + tail_integral({1.0, 0.0}, x, p.quad_r_max, kappa);
    const double outer = ux * mass - far[1] - tail_integral(tail, x, p.quad_r_max, kappa);
    return p.c_ns * (near + outer);
}

double riesz_potential(const TestFunction& f, Point x, const FracParams& p) {
    const double kappa = 2.0 - 2.0 * p.s;
    const double rho0 = cutoff_radius(x);
    const double eps = kInnerRiesz;
    double near = near_integral(rho0, eps, kappa, [&](double zx, double zy) {
        return 0.5 * (f(x.x + zx, x.y + zy) + f(x.x - zx, x.y - zy));
    });
    near += f(x.x, x.y) * 2.0 * kPi * std::pow(eps, 2.0 * p.s) / (2.0 * p.s);
    const auto far = far_integrals<1>(x, rho0, p.quad_r_max, kappa, [&](double yx, double yy) {
        return std::array<double, 1>{f(yx, yy)};
    });
    return p.c_riesz * (near + far[0]);
}

double cross_term(const TestFunction& u1, const TestFunction& u2, Point x, const FracParams& p) {
    const double kappa = 2.0 + 2.0 * p.s;
    const double rho0 = cutoff_radius(x);
    if (p.quad_r_max <= std::hypot(x.x, x.y) + rho0) throw DomainTooSmall("quad_r_max must exceed |x| + ρ0");
    const TailModel t1 = resolve_tail(u1, p, kappa);
    const TailModel t2 = resolve_tail(u2, p, kappa);
    const TailModel t12{t1.amplitude * t2.amplitude, t1.exponent + t2.exponent};
    const double a = u1(x.x, x.y), b = u2(x.x, x.y);

    const double eps = kInnerLaplacian;
    double near = near_integral(rho0, eps, kappa, [&](double zx, double zy) {
        const double p1 = (a - u1(x.x + zx, x.y + zy)) * (b - u2(x.x + zx, x.y + zy));
        const double m1 = (a - u1(x.x - zx, x.y - zy)) * (b - u2(x.x - zx, x.y - zy));
        return 0.5 * (p1 + m1);
    });
    const auto g1 = gradient_of(u1, x), g2 = gradient_of(u2, x);
    near += (g1[0] * g2[0] + g1[1] * g2[1]) * kPi * std::pow(eps, 2.0 - 2.0 * p.s) / (2.0 - 2.0 * p.s);

    const auto far = far_integrals<4>(x, rho0, p.quad_r_max, kappa, [&](double yx, double yy) {
        const double v1 = u1(yx, yy), v2 = u2(yx, yy);
        return std::array<double, 4>{1.0, v1, v2, v1 * v2};
    });
    const double r = p.quad_r_max;
    const double mass = far[0] + tail_integral({1.0, 0.0}, x, r, kappa);
    const double f1 = far[1] + tail_integral(t1, x, r, kappa);
    const double f2 = far[2] + tail_integral(t2, x, r, kappa);
    const double f12 = far[3] + tail_integral(t12, x, r, kappa);
    return near + a * b * mass - a * f2 - b * f1 + f12;
}

ProductRuleDefect product_rule_defect(const TestFunction& u1, const TestFunction& u2, Point x,
                                      const FracParams& p) {
    const double l12 = frac_laplacian(product(u1, u2), x, p);
    const double a = u1(x.x, x.y) * frac_laplacian(u2, x, p);
    const double b = u2(x.x, x.y) * frac_laplacian(u1, x, p);
    const double c = p.c_ns * cross_term(u1, u2, x, p);
    const double scale = std::max({std::abs(l12), std::abs(a), std::abs(b), std::abs(c)});
    return {l12 - a - b + c, scale};
}

CommutatorDefect commutator_defect(const TestFunction& u, int k, Point x, const FracParams& p, double h) {
    if (k != 0 && k != 1) throw InvalidArgument("axis index must be 0 or 1");
    if (!u.gradient) throw InvalidArgument("commutator_defect needs the gradient of u");
    TestFunction du;
    du.value = [&u, k](double a, double b) { return u.gradient(a, b)[static_cast<std::size_t>(k)]; };
    // A decaying tail loses one power under ∂_k but its angular profile is no
    // longer radial; only compactly supported data keep an exact model.
    if (u.tail && u.tail->amplitude == 0.0) du.tail = TailModel{};
    const double lhs = frac_laplacian(du, x, p);
    auto shifted = [&](double t) {
        Point y = x;
        (k == 0 ? y.x : y.y) += t;
        return frac_laplacian(u, y, p);
    };
    const double rhs = (-shifted(2 * h) + 8 * shifted(h) - 8 * shifted(-h) + shifted(-2 * h)) / (12 * h);
    return {lhs - rhs, lhs, rhs};
}

TestFunction riesz_profile(const TestFunction& radial_f, const FracParams& p, int n_table) {
    if (n_table < 16) throw InvalidArgument("riesz_profile needs at least 16 table points");
    const double r_max = p.quad_r_max;
    const double tmax = std::log1p(r_max);
    const double dt = tmax / (n_table - 1);
    std::vector<double> table;
    table.reserve(static_cast<std::size_t>(n_table));
    for (int i = 0; i < n_table; ++i) {
        table.push_back(riesz_potential(radial_f, {std::expm1(i * dt), 0.0}, p));
    }
    const double mass = plane_integral(radial_f, r_max);
    const double amp = p.c_riesz * mass;
    const double expo = 2.0 - 2.0 * p.s;
    auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        table.begin(), table.end(), 0.0, dt, 0.0);

    TestFunction h;
    h.value = [=](double x, double y) {
        const double r = std::hypot(x, y);
        if (r >= r_max) return amp * std::pow(r, -expo);
        return (*spline)(std::log1p(r));
    };
    h.gradient = [=](double x, double y) {
        const double r = std::hypot(x, y);
        if (r == 0.0) return std::array<double, 2>{0.0, 0.0};
        const double dr = r >= r_max ? -expo * amp * std::pow(r, -expo - 1.0) : spline->prime(std::log1p(r)) / (1.0 + r);
        return std::array<double, 2>{dr * x / r, dr * y / r};
    };
    h.tail = TailModel{amp, expo};
    return h;
}

std::vector<SweepRow> radius_sweep(const std::function<double(Point)>& fn, const std::vector<double>& radii,
                                   double angle) {
    std::vector<SweepRow> rows;
    for (double r : radii) rows.push_back({r, fn({r * std::cos(angle), r * std::sin(angle)}), 0.0});
    const std::size_t n = rows.size();
    for (std::size_t k = 0; k < n && n > 1; ++k) {
        const std::size_t lo = k == 0 ? 0 : k - 1;
        const std::size_t hi = k + 1 == n ? k : k + 1;
        rows[k].running_slope = std::log(std::abs(rows[hi].value) / std::abs(rows[lo].value)) /
                                std::log(rows[hi].r / rows[lo].r);
    }
    return rows;
}

DecayFit sweep_decay(const std::vector<SweepRow>& rows) {
    std::vector<double> r, m;
    for (const auto& row : rows) {
        r.push_back(row.r);
        m.push_back(std::abs(row.value));
    }
    return estimate_decay(std::span<const double>(r), std::span<const double>(m));
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "r,value,running_slope\n";
    os.precision(17);
    for (const auto& row : rows) os << row.r << ',' << row.value << ',' << row.running_slope << '\n';
}

}  // namespace lmc
