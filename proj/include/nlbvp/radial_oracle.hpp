#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlbvp/expr.hpp"

namespace nlbvp::oracle {

// Radially symmetric instance of the operator -Laplace + a.grad + h on
// the annulus {R1 < |x| < R2} in dimension N, reduced to the Fourier
// mode k (k >= 1 only meaningful for N = 2):
//   -u'' - ((N-1)/r - alpha(r)) u' + (h(r) + k^2/r^2) u = 0
// with Dirichlet data (value_inner at R1, value_outer at R2).
struct RadialProblem {
    double r1 = 0.0;
    double r2 = 0.0;
    int dimension = 2;
    expr::Expr alpha;  // drift profile: a(x) = alpha(r) x/|x|
    expr::Expr h;      // reaction
    int mode = 0;
    double value_inner = 0.0;
    double value_outer = 0.0;
    std::optional<double> lambda;  // bound when expressions reference it

    void validate() const;
};

// Uniform radial grid function with n intervals (n+1 values).
struct RadialGridFunction {
    double r1 = 0.0;
    double r2 = 0.0;
    std::vector<double> values;

    int intervals() const { return static_cast<int>(values.size()) - 1; }
    double spacing() const { return (r2 - r1) / intervals(); }
    double radius(int i) const { return r1 + spacing() * i; }
    double max_abs() const;

    // Piecewise-linear interpolation.
    double at(double r) const;
};

// Second-order central finite differences, tridiagonal solve; n_points
// is the number of grid intervals (rounded up to even so the Simpson
// quadrature below applies directly).
RadialGridFunction radial_solve(const RadialProblem& p, int n_points);

// sigma_{N-1} * integral of weight(r) u(r) r^(N-1) dr over (R1, R2) by
// composite Simpson on the grid of u. The weight expression sees r (and
// lambda when given).
double radial_weighted_integral(const RadialGridFunction& u, const expr::Expr& weight,
                                int dimension, std::optional<double> lambda = std::nullopt);
double radial_weight_integral(double r1, double r2, const expr::Expr& weight, int dimension,
                              int n_points, std::optional<double> lambda = std::nullopt,
                              bool absolute = false);

// Surface measure of the unit sphere in R^N (2*pi for N = 2).
double unit_sphere_measure(int dimension);

// Generic adaptive Simpson quadrature.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol);

// ---- Example 1: annulus {lambda < |x| < 2 lambda}, a = x/|x|^2, h = 1,
//      inner datum b_i + g * integral(u), outer datum 0. ----

// f(lambda) of the resonance equation; the critical lambda* solves f = 1.
double example1_alg_eq(double lambda, double g);

// Root of example1_alg_eq(., g) = 1 by bracketing + bisection.
// Throws BracketingFailure when no sign change is found (g <= 0).
double alg_eq_root(double g);

// integral of phi over the annulus (phi = basis solution attached to the
// inner circle), in closed form.
double example1_basis_integral(double lambda);

// det(I - R) = 1 - g * example1_basis_integral(lambda).
double example1_det(double lambda, double g);

enum class Regime { Unique, InfinitelyMany, NoSolution };

struct Example1Result {
    Regime regime = Regime::Unique;
    double lambda_star = 0.0;          // root of the resonance equation
    std::optional<double> coefficient; // multiple of phi in the Unique regime
    std::string family;                // description of the solution family
};

// Classification of Example 1 by comparing lambda against lambda*(g)
// at relative tolerance 1e-9.
Example1Result example1_classify(double b_inner, double lambda, double g);

// ---- Example 2: annulus {1 < |x| < lambda}, same operator,
//      g_i(y) = C0 e^{-|y|} sin|y| / |y|, g_o = 0. ----

// Closed-form basis solutions.
double example2_phi(double r, double lambda);
double example2_psi(double r, double lambda);

// C0 for which det(I - R_lambda) has infinitely many roots.
double example2_critical_c0();

// Closed form of integral g_i phi over the annulus.
double example2_integral(double lambda, double c0);

// det(I - R_lambda) = 1 - example2_integral(lambda, c0); lambda > 1.
double example2_det(double lambda, double c0);

// Trigonometric factorization of example2_det at the critical C0.
double example2_det_factored(double lambda);

// First zeros of the determinant at the critical C0, sorted ascending:
// {(2k-1) pi + 2 theta0 - 1, 2k pi + 1 : k = 1..k_max}.
std::vector<double> s0_set(int k_max);

}  // namespace nlbvp::oracle
