#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlbvp/radial_oracle.hpp"

using namespace nlbvp;
using namespace nlbvp::oracle;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("higher Fourier modes with zero data vanish") {
    RadialProblem p;
    p.r1 = 2.0;
    p.r2 = 4.0;
    p.alpha = expr::parse("1/r");
    p.h = expr::parse("1");
    p.value_inner = 0.0;
    p.value_outer = 0.0;
    for (int k : {1, 2, 5}) {
        p.mode = k;
        auto u = radial_solve(p, 256);
        CHECK(u.max_abs() <= 1e-12);
    }
}

TEST_CASE("mode-0 solve matches the Example 2 closed form at second order") {
    const double lam = 4.0;
    RadialProblem p;
    p.r1 = 1.0;
    p.r2 = lam;
    p.alpha = expr::parse("1/r");
    p.h = expr::parse("1");
    p.value_inner = 1.0;
    p.value_outer = 0.0;

    auto error_at = [&](int n) {
        auto u = radial_solve(p, n);
        double err = 0.0;
        for (int i = 0; i <= u.intervals(); ++i)
            err = std::max(err, std::fabs(u.values[static_cast<std::size_t>(i)] -
                                          example2_phi(u.radius(i), lam)));
        return err;
    };
    double e1 = error_at(128), e2 = error_at(256), e3 = error_at(512);
    CHECK(e1 < 1e-4);
    // Richardson: halving the spacing divides the error by about four.
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.2));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("radial problem validation") {
    RadialProblem p;
    p.r1 = 2.0;
    p.r2 = 1.0;
    p.alpha = expr::parse("0");
    p.h = expr::parse("1");
    CHECK_THROWS_AS(p.validate(), InvalidRadii);
    p.r1 = 1.0;
    p.r2 = 2.0;
    p.mode = 1;
    p.dimension = 3;
    CHECK_THROWS_AS(p.validate(), InvariantViolation);
    p.dimension = 2;
    CHECK_NOTHROW(p.validate());
    // Weak convection violated on the grid.
    p.mode = 0;
    p.alpha = expr::parse("3");
    CHECK_THROWS_AS(radial_solve(p, 64), InvariantViolation);
}

TEST_CASE("resonance equation root for g = 1/(2 pi)") {
    const double g = 1.0 / (2.0 * kPi);
    double root = alg_eq_root(g);
    CHECK(std::fabs(root - std::log(2.0 + std::sqrt(3.0))) <= 1e-9);
    CHECK(std::fabs(root - 1.3169578969248166) <= 1e-9);
    CHECK(std::fabs(example1_alg_eq(root, g) - 1.0) <= 1e-12);

    // Larger couplings pull the root toward zero.
    double prev = alg_eq_root(0.1);
    for (double gg : {0.5, 1.0}) {
        double r = alg_eq_root(gg);
        CHECK(r < prev);
        prev = r;
    }
    CHECK_THROWS_AS(alg_eq_root(0.0), BracketingFailure);
    CHECK_THROWS_AS(alg_eq_root(-1.0), BracketingFailure);
}

TEST_CASE("Example 1 determinant and classification") {
    const double g = 1.0 / (2.0 * kPi);
    const double star = alg_eq_root(g);

    // The determinant vanishes exactly at the resonance root.
    CHECK(std::fabs(example1_det(star, g)) <= 1e-10);

    // Closed-form basis integral against independent quadrature of
    // phi(r) = (e^r - e^{4L-r})/(e^L - e^{3L}) written overflow-safe.
    for (double lam : {0.7, 1.3169578969248166, 2.9}) {
        double quad = 2.0 * kPi *
                      adaptive_simpson(
                          [lam](double r) {
                              double phi = (std::exp(r - 3.0 * lam) - std::exp(lam - r)) /
                                           (std::exp(-2.0 * lam) - 1.0);
                              return phi * r;
                          },
                          lam, 2.0 * lam, 1e-13);
        CHECK(example1_basis_integral(lam) == doctest::Approx(quad).epsilon(1e-11));
    }

    CHECK(example1_classify(0.0, star, g).regime == Regime::InfinitelyMany);
    CHECK(example1_classify(1.0, star, g).regime == Regime::NoSolution);
    CHECK(example1_classify(1.0, 2.0 * star, g).regime == Regime::Unique);
    CHECK(example1_classify(-3.5, 0.4, g).regime == Regime::Unique);
    auto family = example1_classify(0.0, star, g);
    CHECK(family.family.find("exp(4*lambda - r)") != std::string::npos);
    CHECK_THROWS_AS(example1_classify(1.0, -1.0, g), InvalidLambda);
}

TEST_CASE("Example 2 closed forms") {
    const double c0 = example2_critical_c0();
    CHECK(c0 == doctest::Approx(0.9729654867141456).epsilon(1e-15));

    // Boundary data of the closed-form basis solutions.
    for (double lam : {2.0, 6.0, 30.0}) {
        CHECK(example2_phi(1.0, lam) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::fabs(example2_phi(lam, lam)) <= 1e-14);
        CHECK(std::fabs(example2_psi(1.0, lam)) <= 1e-14);
        CHECK(example2_psi(lam, lam) == doctest::Approx(1.0).epsilon(1e-14));
    }

    // Frozen determinant values.
    CHECK(example2_det(4.0, c0) == doctest::Approx(0.0017651068953843385).epsilon(1e-12));
    CHECK(example2_det(6.0, c0) == doctest::Approx(-8.0077716680726496e-05).epsilon(1e-10));

    // Trigonometric factorization against the direct form.
    for (double lam : {2.0, 4.0, 8.0, 12.0})
        CHECK(std::fabs(example2_det(lam, c0) - example2_det_factored(lam)) <= 1e-12);

    // The factored form changes sign across each root and vanishes there.
    for (double root : s0_set(2)) {
        CHECK(std::fabs(example2_det(root, c0)) <= 1e-10);
        CHECK(example2_det(root - 1e-3, c0) * example2_det(root + 1e-3, c0) < 0.0);
    }

    // Large-lambda limit at the critical constant.
    CHECK(std::fabs(example2_integral(30.0, c0) - 1.0) <= 1e-10);

    // Away from the critical constant the determinant stays away from 0.
    for (double lam = 20.0; lam <= 100.0; lam += 2.5)
        CHECK(std::fabs(example2_det(lam, 0.5)) > 0.01);

    CHECK_THROWS_AS(example2_det(1.0, c0), InvalidLambda);
    CHECK_THROWS_AS(example2_det(0.5, c0), InvalidLambda);
}

TEST_CASE("root lattice values") {
    auto roots = s0_set(2);
    REQUIRE(roots.size() == 4);
    CHECK(roots[0] == doctest::Approx(4.355890089177974).epsilon(1e-14));
    CHECK(roots[1] == doctest::Approx(7.283185307179586).epsilon(1e-14));
    CHECK(roots[2] == doctest::Approx(10.63907539635756).epsilon(1e-14));
    CHECK(roots[3] == doctest::Approx(13.566370614359172).epsilon(1e-14));
    CHECK_THROWS_AS(s0_set(0), InvariantViolation);
}

TEST_CASE("three-dimensional radial solve against the closed form") {
    // -u'' - (2/r) u' + u = 0 on (1, 2): with v = r u the equation
    // collapses to v'' = v, so u = (A e^r + B e^{-r})/r.
    RadialProblem p;
    p.r1 = 1.0;
    p.r2 = 2.0;
    p.dimension = 3;
    p.alpha = expr::parse("0");
    p.h = expr::parse("1");
    p.value_inner = 1.0;
    p.value_outer = 0.0;

    // Fit A, B to the boundary data: A e + B/e = 1, A e^2/2 + B e^{-2}/2 = 0.
    const double e1 = std::exp(1.0), e2 = std::exp(2.0);
    const double det = e1 * (0.5 / e2) - (1.0 / e1) * (0.5 * e2);
    const double a_coef = (0.5 / e2) / det;
    const double b_coef = -(0.5 * e2) / det;
    auto exact = [&](double r) { return (a_coef * std::exp(r) + b_coef * std::exp(-r)) / r; };
    CHECK(exact(1.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::fabs(exact(2.0)) <= 1e-13);

    auto error_at = [&](int n) {
        auto u = radial_solve(p, n);
        double err = 0.0;
        for (int i = 0; i <= u.intervals(); ++i)
            err = std::max(err, std::fabs(u.values[static_cast<std::size_t>(i)] - exact(u.radius(i))));
        return err;
    };
    double eco = error_at(128), efi = error_at(256);
    CHECK(eco < 1e-4);
    CHECK(eco / efi == doctest::Approx(4.0).epsilon(0.2));

    // Volume of the spherical shell 1 < r < 2 via weight 1.
    double volume = radial_weight_integral(1.0, 2.0, expr::parse("1"), 3, 512);
    CHECK(volume == doctest::Approx(4.0 / 3.0 * kPi * 7.0).epsilon(1e-10));
}

TEST_CASE("radial quadrature") {
    // Area of the annulus 1 < r < 2 via weight 1.
    double area = radial_weight_integral(1.0, 2.0, expr::parse("1"), 2, 256);
    CHECK(area == doctest::Approx(3.0 * kPi).epsilon(1e-12));
    CHECK(unit_sphere_measure(2) == doctest::Approx(2.0 * kPi));
    CHECK(unit_sphere_measure(3) == doctest::Approx(4.0 * kPi));

    // Simpson on a grid function: integral of phi * weight recovers the
    // transcribed closed form as the grid refines.
    const double lam = 4.0;
    RadialProblem p;
    p.r1 = 1.0;
    p.r2 = lam;
    p.alpha = expr::parse("1/r");
    p.h = expr::parse("1");
    p.value_inner = 1.0;
    p.value_outer = 0.0;
    auto u = radial_solve(p, 2048);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g*exp(-r)*sin(r)/r", example2_critical_c0());
    double integral = radial_weighted_integral(u, expr::parse(buf), 2);
    CHECK(integral == doctest::Approx(example2_integral(lam, example2_critical_c0())).epsilon(1e-5));
}
