#include "nlbvp/radial_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nlbvp/errors.hpp"

namespace nlbvp::oracle {

namespace {

constexpr double kPi = std::numbers::pi;

expr::Bindings radius_env(double r, std::optional<double> lambda) {
    expr::Bindings env;
    env.r(r);
    if (lambda) env.lambda(*lambda);
    return env;
}

}  // namespace

void RadialProblem::validate() const {
    if (!(r1 > 0.0) || !(r2 > r1))
        throw InvalidRadii("radial problem requires 0 < R1 < R2");
    if (dimension < 2)
        throw InvariantViolation("dimension must be >= 2");
    if (mode < 0)
        throw InvariantViolation("Fourier mode must be >= 0");
    if (mode > 0 && dimension != 2)
        throw InvariantViolation("Fourier modes are only defined for the planar reduction");
    if (alpha.empty() || h.empty())
        throw InvariantViolation("radial problem needs alpha and h expressions");
}

double RadialGridFunction::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
}

double RadialGridFunction::at(double r) const {
    const double h = spacing();
    double t = (r - r1) / h;
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, intervals() - 1);
    double w = t - i;
    return values[static_cast<std::size_t>(i)] * (1.0 - w) + values[static_cast<std::size_t>(i) + 1] * w;
}

RadialGridFunction radial_solve(const RadialProblem& p, int n_points) {
    p.validate();
    if (n_points < 16)
        throw InvariantViolation("radial_solve needs at least 16 grid intervals");
    int n = n_points + (n_points % 2);  // even interval count for Simpson

    const double dr = (p.r2 - p.r1) / n;
    RadialGridFunction u;
    u.r1 = p.r1;
    u.r2 = p.r2;
    u.values.assign(static_cast<std::size_t>(n) + 1, 0.0);
    u.values.front() = p.value_inner;
    u.values.back() = p.value_outer;

    if (n == 0) return u;

    // -u'' + pcoef u' + qcoef u = 0 with
    // pcoef = alpha - (N-1)/r, qcoef = h + k^2/r^2.
    std::vector<double> sub(static_cast<std::size_t>(n) - 1),
        diag(static_cast<std::size_t>(n) - 1), sup(static_cast<std::size_t>(n) - 1),
        rhs(static_cast<std::size_t>(n) - 1, 0.0);
    for (int i = 1; i < n; ++i) {
        double r = p.r1 + dr * i;
        auto env = radius_env(r, p.lambda);
        double alpha = p.alpha.eval(env);
        double h = p.h.eval(env);
        if (!(h > 0.0))
            throw InvariantViolation("h(r) must be positive on the radial grid");
        if (!(4.0 * h > alpha * alpha))
            throw InvariantViolation("weak-convection condition violated on the radial grid");
        double pc = alpha - (p.dimension - 1) / r;
        double qc = h + static_cast<double>(p.mode) * p.mode / (r * r);
        sub[static_cast<std::size_t>(i) - 1] = -1.0 / (dr * dr) - pc / (2.0 * dr);
        diag[static_cast<std::size_t>(i) - 1] = 2.0 / (dr * dr) + qc;
        sup[static_cast<std::size_t>(i) - 1] = -1.0 / (dr * dr) + pc / (2.0 * dr);
    }
    rhs.front() -= sub.front() * p.value_inner;
    rhs.back() -= sup.back() * p.value_outer;

    // Thomas algorithm.
    std::vector<double> c_star(sup), d_star(rhs);
    double pivot = diag.front();
    if (pivot == 0.0) throw SingularSystem("zero pivot in tridiagonal solve");
    c_star.front() /= pivot;
    d_star.front() /= pivot;
    for (std::size_t i = 1; i < diag.size(); ++i) {
        double m = diag[i] - sub[i] * c_star[i - 1];
        if (m == 0.0) throw SingularSystem("zero pivot in tridiagonal solve");
        c_star[i] = sup[i] / m;
        d_star[i] = (rhs[i] - sub[i] * d_star[i - 1]) / m;
    }
    std::vector<double> x(diag.size());
    x.back() = d_star.back();
    for (std::size_t i = diag.size() - 1; i-- > 0;)
        x[i] = d_star[i] - c_star[i] * x[i + 1];

    // Residual gate relative to the matrix and solution scale.
    double scale = 0.0, resid = 0.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        double row = diag[i] * x[i];
        if (i > 0) row += sub[i] * x[i - 1];
        if (i + 1 < diag.size()) row += sup[i] * x[i + 1];
        resid = std::max(resid, std::fabs(row - rhs[i]));
        scale = std::max(scale, (std::fabs(diag[i]) + std::fabs(sub[i]) + std::fabs(sup[i])));
    }
    double xmax = 0.0;
    for (double v : x) xmax = std::max(xmax, std::fabs(v));
    double denom = scale * std::max({xmax, std::fabs(p.value_inner), std::fabs(p.value_outer)});
    if (denom > 0.0 && resid > 1e-12 * denom)
        throw SingularSystem("tridiagonal solve did not reach the residual tolerance");

    for (int i = 1; i < n; ++i) u.values[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i) - 1];
    return u;
}

double unit_sphere_measure(int dimension) {
    return 2.0 * std::pow(kPi, dimension / 2.0) / std::tgamma(dimension / 2.0);
}

double radial_weighted_integral(const RadialGridFunction& u, const expr::Expr& weight,
                                int dimension, std::optional<double> lambda) {
    const int n = u.intervals();
    if (n < 2 || n % 2 != 0)
        throw InvariantViolation("Simpson quadrature needs an even interval count");
    const double h = u.spacing();
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        double r = u.radius(i);
        double w = weight.eval(radius_env(r, lambda));
        double f = w * u.values[static_cast<std::size_t>(i)] * std::pow(r, dimension - 1);
        double coef = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += coef * f;
    }
    return unit_sphere_measure(dimension) * sum * h / 3.0;
}

double radial_weight_integral(double r1, double r2, const expr::Expr& weight, int dimension,
                              int n_points, std::optional<double> lambda, bool absolute) {
    int n = n_points + (n_points % 2);
    const double h = (r2 - r1) / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        double r = r1 + h * i;
        double w = weight.eval(radius_env(r, lambda));
        if (absolute) w = std::fabs(w);
        double f = w * std::pow(r, dimension - 1);
        double coef = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += coef * f;
    }
    return unit_sphere_measure(dimension) * sum * h / 3.0;
}

namespace {

double simpson(double fa, double fm, double fb, double a, double b) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double b, double fa,
                     double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(fa, flm, fm, a, m);
    double right = simpson(fm, frm, fb, m, b);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return adaptive_step(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 48);
}

double example1_alg_eq(double lambda, double g) {
    double c = 1.0 / (4.0 * g * kPi);
    if (lambda > 350.0) {
        // Past the overflow range the sign is set by the leading factor.
        return ((1.0 + lambda) / 2.0 - c > 0.0) ? std::numeric_limits<double>::infinity()
                                                : -std::numeric_limits<double>::infinity();
    }
    return ((1.0 + lambda) / 2.0 - c) * (std::exp(2.0 * lambda) - 1.0) / lambda -
           2.0 * (std::exp(lambda) - 1.0);
}

double alg_eq_root(double g) {
    if (!(g > 0.0)) throw BracketingFailure("alg_eq_root requires g > 0");
    auto f = [g](double lam) { return example1_alg_eq(lam, g) - 1.0; };

    // f < 1 near zero, f -> infinity; scan geometrically for the first
    // sign change on (1e-8, 1e3).
    double lo = 1e-8;
    double flo = f(lo);
    if (flo > 0.0)
        throw BracketingFailure("no bracket: f already above 1 at the left end");
    double hi = lo;
    double fhi = flo;
    while (hi < 1e3) {
        hi = std::min(hi * 2.0, 1e3);
        fhi = f(hi);
        if (fhi >= 0.0) break;
        lo = hi;
        flo = fhi;
    }
    if (fhi < 0.0) throw BracketingFailure("no sign change of the resonance equation on (1e-8, 1e3)");

    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fmid = f(mid);
        if (std::fabs(fmid) <= 1e-12) return mid;
        if ((fmid < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

double example1_basis_integral(double lambda) {
    // 2 pi * int_lambda^{2 lambda} phi(r) r dr with
    // phi = (e^r - e^{4 lambda - r})/(e^lambda - e^{3 lambda}),
    // normalized by e^{3 lambda} to avoid overflow.
    double num = 4.0 * lambda * std::exp(-lambda) - (lambda - 1.0) * std::exp(-2.0 * lambda) -
                 (lambda + 1.0);
    double den = std::exp(-2.0 * lambda) - 1.0;
    return 2.0 * kPi * num / den;
}

double example1_det(double lambda, double g) {
    return 1.0 - g * example1_basis_integral(lambda);
}

Example1Result example1_classify(double b_inner, double lambda, double g) {
    if (!(lambda > 0.0)) throw InvalidLambda("lambda must be positive");
    Example1Result res;
    res.lambda_star = alg_eq_root(g);
    bool critical = std::fabs(lambda - res.lambda_star) <= 1e-9 * std::max(1.0, res.lambda_star);
    if (critical && b_inner == 0.0) {
        res.regime = Regime::InfinitelyMany;
        res.family = "c*(exp(r) - exp(4*lambda - r)) for any constant c";
    } else if (critical) {
        res.regime = Regime::NoSolution;
        res.family = "";
    } else {
        res.regime = Regime::Unique;
        res.coefficient = b_inner / example1_det(lambda, g);
        res.family = "B*phi with phi the inner basis solution";
    }
    return res;
}

double example2_phi(double r, double lambda) {
    return (std::exp(-r) - std::exp(-2.0 * lambda + r)) /
           (std::exp(-1.0) - std::exp(-2.0 * lambda + 1.0));
}

double example2_psi(double r, double lambda) {
    // Normalized by e^lambda so large lambda stays in range.
    return (std::exp(r - lambda) - std::exp(2.0 - r - lambda)) /
           (1.0 - std::exp(2.0 - 2.0 * lambda));
}

double example2_critical_c0() {
    return 5.0 * std::numbers::e / (2.0 * kPi * (2.0 * std::sin(1.0) + std::cos(1.0)));
}

double example2_integral(double lambda, double c0) {
    if (!(lambda > 1.0)) throw InvalidLambda("Example 2 requires lambda > 1");
    double q = 2.0 * std::sin(1.0) + std::cos(1.0);
    double bracket = std::exp(-2.0) / 5.0 * q -
                     std::exp(-2.0 * lambda) *
                         (std::cos(1.0) - std::cos(lambda) +
                          (2.0 * std::sin(lambda) + std::cos(lambda)) / 5.0);
    return 2.0 * kPi * c0 / (std::exp(-1.0) - std::exp(-2.0 * lambda + 1.0)) * bracket;
}

double example2_det(double lambda, double c0) {
    return 1.0 - example2_integral(lambda, c0);
}

double example2_det_factored(double lambda) {
    if (!(lambda > 1.0)) throw InvalidLambda("Example 2 requires lambda > 1");
    double q = 2.0 * std::sin(1.0) + std::cos(1.0);
    double theta0 = std::asin(2.0 / std::sqrt(5.0));
    double pref = 4.0 * std::sqrt(5.0) * std::exp(-2.0 * lambda + 2.0) /
                  ((1.0 - std::exp(-2.0 * lambda + 2.0)) * q);
    return -pref * std::cos((1.0 + lambda - 2.0 * theta0) / 2.0) * std::sin((1.0 - lambda) / 2.0);
}

std::vector<double> s0_set(int k_max) {
    if (k_max < 1) throw InvariantViolation("k_max must be >= 1");
    double theta0 = std::asin(2.0 / std::sqrt(5.0));
    std::vector<double> roots;
    roots.reserve(static_cast<std::size_t>(k_max) * 2);
    for (int k = 1; k <= k_max; ++k) {
        roots.push_back((2.0 * k - 1.0) * kPi + 2.0 * theta0 - 1.0);
        roots.push_back(2.0 * k * kPi + 1.0);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace nlbvp::oracle
