#include "nlbvp/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "nlbvp/config.hpp"
#include "nlbvp/fem.hpp"
#include "nlbvp/geometry.hpp"
#include "nlbvp/nonlocal.hpp"
#include "nlbvp/pipeline.hpp"
#include "nlbvp/radial_oracle.hpp"
#include "nlbvp/sweep.hpp"

namespace nlbvp::acceptance {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

class Check {
public:
    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed_ = false;
            if (!failures_.empty()) failures_ += "; ";
            failures_ += what;
        }
    }
    void note(const std::string& what) {
        if (!notes_.empty()) notes_ += "; ";
        notes_ += what;
    }
    bool passed() const { return passed_; }
    std::string detail() const {
        if (passed_) return notes_;
        return failures_ + (notes_.empty() ? "" : " [" + notes_ + "]");
    }

private:
    bool passed_ = true;
    std::string failures_;
    std::string notes_;
};

std::string c0_weight_source(double c0) { return fmt("%.17g*exp(-r)*sin(r)/r", c0); }

// Example 2 problem: annulus {1 < |x| < lambda}, a = x/|x|^2, h = 1,
// g_o = 0 and the inner weight from c0 (critical when absent).
config::ProblemConfig example2_config(const std::string& engine, std::optional<double> c0,
                                      int refinements) {
    config::ProblemConfig cfg;
    cfg.kind = config::DomainKind::Annulus;
    cfg.inner_radius = expr::parse("1");
    cfg.outer_radius = expr::parse("lambda");
    cfg.lambda = 4.0;
    cfg.drift = fem::RadialDrift{expr::parse("1/r")};
    cfg.h = expr::parse("1");
    cfg.components = 2;
    cfg.b = {0.0, 1.0};
    double c0_value = c0 ? *c0 : oracle::example2_critical_c0();
    cfg.weight_sources = {"0", c0_weight_source(c0_value)};
    cfg.weights = {expr::parse("0"), expr::parse(cfg.weight_sources[1])};
    cfg.nr = 16;
    cfg.ntheta = 32;
    cfg.refinements = refinements;
    cfg.n_points = 2048;
    cfg.engine = engine;
    cfg.example = 2;
    cfg.c0 = c0;
    cfg.validate();
    return cfg;
}

config::ProblemConfig example1_config(double g, double lambda, int refinements) {
    config::ProblemConfig cfg;
    cfg.kind = config::DomainKind::Annulus;
    cfg.inner_radius = expr::parse("lambda");
    cfg.outer_radius = expr::parse("2*lambda");
    cfg.lambda = lambda;
    cfg.drift = fem::RadialDrift{expr::parse("1/r")};
    cfg.h = expr::parse("1");
    cfg.components = 2;
    cfg.b = {0.0, 0.0};
    cfg.weight_sources = {"0", fmt("%.17g", g)};
    cfg.weights = {expr::parse("0"), expr::parse(cfg.weight_sources[1])};
    cfg.nr = 16;
    cfg.ntheta = 32;
    cfg.refinements = refinements;
    cfg.engine = "fem";
    cfg.example = 1;
    cfg.example1_g = g;
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------- C1
// Oracle sweep over (1.5, 12] at the critical C0 finds exactly the three
// determinant roots, each to 1e-6, in under 5 seconds.
CriterionResult criterion1() {
    CriterionResult res{1, "Example 2 root lattice (oracle sweep)", false, "", 0.0};
    auto t0 = std::chrono::steady_clock::now();
    Check chk;

    const double theta0 = std::asin(2.0 / std::sqrt(5.0));
    const double expected[3] = {kPi + 2.0 * theta0 - 1.0, 2.0 * kPi + 1.0,
                                3.0 * kPi + 2.0 * theta0 - 1.0};
    // Frozen oracle values (evaluated independently with 64-bit floats).
    chk.require(std::fabs(expected[0] - 4.355890089177974) < 1e-12, "frozen root 1 mismatch");
    chk.require(std::fabs(expected[1] - 7.283185307179586) < 1e-12, "frozen root 2 mismatch");
    chk.require(std::fabs(expected[2] - 10.63907539635756) < 1e-12, "frozen root 3 mismatch");

    auto cfg = example2_config("oracle", std::nullopt, 0);
    auto result = sweep::sweep_lambda(cfg, 1.5, 12.0, 400, pipeline::Engine::Oracle);
    chk.require(result.brackets.size() == 3,
                fmt("expected 3 brackets, found %zu", result.brackets.size()));

    std::string roots_txt;
    for (std::size_t k = 0; k < result.brackets.size() && k < 3; ++k) {
        double root = sweep::refine_root(cfg, pipeline::Engine::Oracle, result.brackets[k], 1e-9);
        roots_txt += fmt("%s%.7f", k ? ", " : "", root);
        chk.require(std::fabs(root - expected[k]) <= 1e-6,
                    fmt("root %zu = %.9f, expected %.9f", k + 1, root, expected[k]));
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    chk.require(res.seconds < 5.0, fmt("runtime %.2fs exceeds 5s", res.seconds));
    chk.note("roots {" + roots_txt + "}");

    res.passed = chk.passed();
    res.detail = chk.detail();
    return res;
}

// ---------------------------------------------------------------- C2
// FEM determinant agrees with the closed form at order >= 1.9 and
// reproduces each root within 5e-2 on the 64x128 mesh.
CriterionResult criterion2() {
    CriterionResult res{2, "Example 2 FEM agreement", false, "", 0.0};
    auto t0 = std::chrono::steady_clock::now();
    Check chk;

    const double lambdas[3] = {3.0, 6.0, 9.0};
    std::string order_txt;
    for (double lam : lambdas) {
        double det_oracle = oracle::example2_det(lam, oracle::example2_critical_c0());
        double err[3];
        for (int k = 0; k < 3; ++k) {
            auto cfg = example2_config("fem", std::nullopt, k);
            err[k] = std::fabs(pipeline::det_at(cfg, pipeline::Engine::Fem, lam) - det_oracle);
        }
        double p1 = std::log2(err[0] / err[1]);
        double p2 = std::log2(err[1] / err[2]);
        order_txt += fmt("%slam=%g: err=%.2e orders=(%.2f, %.2f)", order_txt.empty() ? "" : "; ",
                         lam, err[2], p1, p2);
        chk.require(p1 >= 1.9 && p2 >= 1.9,
                    fmt("observed order below 1.9 at lambda=%g (%.2f, %.2f)", lam, p1, p2));
    }
    chk.note(order_txt);

    const double theta0 = std::asin(2.0 / std::sqrt(5.0));
    const double expected[3] = {kPi + 2.0 * theta0 - 1.0, 2.0 * kPi + 1.0,
                                3.0 * kPi + 2.0 * theta0 - 1.0};
    auto cfg_fine = example2_config("fem", std::nullopt, 2);  // 64 x 128
    for (int k = 0; k < 3; ++k) {
        sweep::Bracket bracket{expected[k] - 0.25, expected[k] + 0.25};
        try {
            double root = sweep::refine_root(cfg_fine, pipeline::Engine::Fem, bracket, 1e-3);
            chk.require(std::fabs(root - expected[k]) <= 5e-2,
                        fmt("FEM root %d = %.6f vs oracle %.6f (|d|=%.3g)", k + 1, root,
                            expected[k], std::fabs(root - expected[k])));
        } catch (const NoSignChange&) {
            chk.require(false, fmt("no FEM sign change near root %d (%.6f): determinant "
                                   "discretization error exceeds the root signal",
                                   k + 1, expected[k]));
        }
    }

    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    chk.require(res.seconds < 180.0, fmt("runtime %.1fs exceeds 3min", res.seconds));
    res.passed = chk.passed();
    res.detail = chk.detail();
    return res;
}

// ---------------------------------------------------------------- C3
CriterionResult criterion3() {
    CriterionResult res{3, "Example 2 limit of the weighted integral", false, "", 0.0};
    auto t0 = std::chrono::steady_clock::now();
    Check chk;
    double value = oracle::example2_integral(30.0, oracle::example2_critical_c0());
    chk.require(std::fabs(value - 1.0) <= 1e-10, fmt("integral at lambda=30 is %.17g", value));
    chk.note(fmt("|I(30) - 1| = %.3g", std::fabs(value - 1.0)));
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.passed = chk.passed();
    res.detail = chk.detail();
    return res;
}

// ---------------------------------------------------------------- C4
CriterionResult criterion4() {
    CriterionResult res{4, "Example 1 trichotomy", false, "", 0.0};
    auto t0 = std::chrono::steady_clock::now();
    Check chk;

    const double g = 1.0 / (2.0 * kPi);
    const double expected_root = std::log(2.0 + std::sqrt(3.0));  // 1.3169578969248166
    double root = oracle::alg_eq_root(g);
    chk.require(std::fabs(root - expected_root) <= 1e-9,
                fmt("alg_eq_root = %.12f, expected ln(2+sqrt(3)) = %.12f", root, expected_root));

    auto infinitely = oracle::example1_classify(0.0, root, g);
    auto none = oracle::example1_classify(1.0, root, g);
    auto unique = oracle::example1_classify(1.0, 2.0 * root, g);
    chk.require(infinitely.regime == oracle::Regime::InfinitelyMany, "b=0 at lambda* not InfinitelyMany");
    chk.require(none.regime == oracle::Regime::NoSolution, "b=1 at lambda* not NoSolution");
    chk.require(unique.regime == oracle::Regime::Unique, "b=1 at 2 lambda* not Unique");

    // FEM pipeline at lambda*: the determinant must vanish to within the
    // discretization threshold pinned for the 64x128 mesh.
    const double eps_det = 5e-3;
    auto cfg = example1_config(g, root, 2);
    cfg.eps_det = eps_det;
    double det_fem = pipeline::det_at(cfg, pipeline::Engine::Fem, root);
    chk.require(std::fabs(det_fem) <= eps_det,
                fmt("|det_fem(lambda*)| = %.3g exceeds eps_det = %.1g", std::fabs(det_fem), eps_det));
    chk.note(fmt("lambda* = %.9f, det_fem(lambda*) = %.3g", root, det_fem));

    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.passed = chk.passed();
    res.detail = chk.detail();
    return res;
}

// ---------------------------------------------------------------- C5
CriterionResult criterion5() {
    CriterionResult res{5, "Closed-form solution accuracy (FEM phi)", false, "", 0.0};
    auto t0 = std::chrono::steady_clock::now();
    Check chk;

    const double lam = 4.0;
    double err[3];
    for (int k = 0; k < 3; ++k) {
        auto cfg = example2_config("fem", std::nullopt, k);
        auto inst = pipeline::fem_instance(cfg, lam);
        const auto& phi = inst.basis.fields[1];  // inner basis solution
        double e = 0.0;
        for (int i = 0; i < inst.mesh->node_count(); ++i) {
            const auto& p = inst.mesh->nodes[static_cast<std::size_t>(i)];
            double exact = oracle::example2_phi(std::hypot(p.x, p.y), lam);
            e = std::max(e, std::fabs(phi.values[static_cast<std::size_t>(i)] - exact));
        }
        err[k] = e;
    }
    double p1 = std::log2(err[0] / err[1]);
    double p2 = std::log2(err[1] / err[2]);
    chk.require(err[2] <= 2e-3, fmt("L_inf error %.3g exceeds 2e-3 at 64x128", err[2]));
    chk.require(p1 >= 1.9 && p2 >= 1.9, fmt("observed orders (%.2f, %.2f) below 1.9", p1, p2));
    chk.note(fmt("errors (%.2e, %.2e, %.2e), orders (%.2f, %.2f)", err[0], err[1], err[2], p1, p2));

    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.passed = chk.passed();
    res.detail = chk.detail();
    return res;
}

// ---------------------------------------------------------------- C6
CriterionResult criterion6() {
    CriterionResult res{6, "H1-capacity of the annulus", false, "", 0.0};
    auto t0 = std::chrono::steady_clock::now();
    Check chk;

    auto capacity_refined = [](double r1, double r2) {
        geom::Mesh mesh = geom::generate_annulus_mesh(r1, r2, 8, 16);
        for (int k = 0; k < 3; ++k) mesh = geom::refine(mesh);
        return fem::capacity_fem(std::make_shared<const geom::Mesh>(std::move(mesh)));
    };
    const double analytic = 2.0 * kPi / std::log(2.0);  // 9.064720283654388
    double cap12 = capacity_refined(1.0, 2.0);
    double cap24 = capacity_refined(2.0, 4.0);
    chk.require(std::fabs(cap12 - analytic) <= 0.01 * analytic,
                fmt("capacity(1,2) = %.6f vs analytic %.6f", cap12, analytic));
    chk.require(std::fabs(cap24 - cap12) <= 0.01 * cap12,
                fmt("capacity(2,4) = %.6f vs capacity(1,2) = %.6f", cap24, cap12));
    chk.note(fmt("cap(1,2)=%.6f, cap(2,4)=%.6f, analytic=%.6f", cap12, cap24, analytic));

    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.passed = chk.passed();
    res.detail = chk.detail();
    return res;
}

// ---------------------------------------------------------------- C7
// Sufficient-condition guarantees on randomized weight fields.
CriterionResult criterion7() {
    CriterionResult res{7, "Sufficient-condition guarantees (randomized weights)", false, "", 0.0};
    auto t0 = std::chrono::steady_clock::now();
    Check chk;

    geom::MeshPtr mesh = std::make_shared<const geom::Mesh>(geom::generate_annulus_mesh(1.0, 2.5, 32, 64));
    const double lambda = 2.5;
    fem::CoefficientField coeffs(expr::parse("1"), fem::RadialDrift{expr::parse("1/r")}, lambda);
    fem::BasisSolutionSet basis = fem::basis_solutions(mesh, coeffs);
    basis.validate();

    std::mt19937 rng(20240817u);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto random_weight = [&](double target_abs_integral) {
        double beta = 0.2 + 1.3 * unit(rng);
        double p = 0.5 + 2.5 * unit(rng), q = 2.0 * kPi * unit(rng);
        double s = 0.5 + 2.5 * unit(rng), t = 2.0 * kPi * unit(rng);
        std::string base = fmt("exp(-%.17g*r)*(1 + 0.5*sin(%.17g*x + %.17g)*cos(%.17g*y + %.17g))",
                               beta, p, q, s, t);
        auto raw = fem::integrate_weight(*mesh, expr::parse(base), lambda);
        double amplitude = target_abs_integral / raw.abs_integral;
        return expr::parse(fmt("%.17g*(%s)", amplitude, base.c_str()));
    };

    int smallness_cases = 0, nonneg_cases = 0;
    for (int trial = 0; trial < 50; ++trial) {
        // Smallness guarantee: total absolute mass at most one implies det > 0.
        // Trial 0 sits at the boundary of the hypothesis (minus a hair of
        // slack so the re-evaluated quadrature sum stays at or below 1).
        double total = (trial == 0) ? 1.0 - 1e-9 : 0.1 + 0.9 * unit(rng);
        double split = 0.2 + 0.6 * unit(rng);
        std::vector<expr::Expr> weights{random_weight(total * (1.0 - split)),
                                        random_weight(total * split)};
        auto report = nonlocal::check_sufficient_conditions(*mesh, weights, lambda);
        chk.require(report.smallness_holds, fmt("trial %d: scaling failed (total %.3f)", trial,
                                                report.abs_integral_total));
        std::vector<double> b{4.0 * unit(rng) - 2.0, 4.0 * unit(rng) - 2.0};
        auto sys = nonlocal::build_system(basis, weights, b, lambda);
        chk.require(sys.det > 0.0, fmt("trial %d: det = %.6g not positive under smallness", trial,
                                       sys.det));
        auto cls = nonlocal::classify(sys);
        chk.require(cls.kind == nonlocal::Kind::Unique,
                    fmt("trial %d: smallness case classified %s", trial, kind_name(cls.kind)));
        ++smallness_cases;

        // Non-negative weights with each integral below one never give
        // InfinitelyMany.
        std::vector<expr::Expr> nn{random_weight(0.3 + 0.69 * unit(rng)),
                                   random_weight(0.3 + 0.69 * unit(rng))};
        auto nn_report = nonlocal::check_sufficient_conditions(*mesh, nn, lambda);
        chk.require(nn_report.all_non_negative && nn_report.nonneg_holds,
                    fmt("trial %d: non-negative construction failed", trial));
        std::vector<double> nb = (trial % 7 == 0)
                                     ? std::vector<double>{0.0, 0.0}
                                     : std::vector<double>{4.0 * unit(rng) - 2.0, 4.0 * unit(rng) - 2.0};
        auto nn_sys = nonlocal::build_system(basis, nn, nb, lambda);
        auto nn_cls = nonlocal::classify(nn_sys);
        chk.require(nn_cls.kind != nonlocal::Kind::InfinitelyMany,
                    fmt("trial %d: InfinitelyMany despite non-negative sub-unit weights", trial));
        ++nonneg_cases;
    }
    chk.note(fmt("%d smallness cases, %d non-negative cases", smallness_cases, nonneg_cases));

    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.passed = chk.passed();
    res.detail = chk.detail();
    return res;
}

// ---------------------------------------------------------------- C8
CriterionResult criterion8() {
    CriterionResult res{8, "Fixed-point closure (randomized Unique problems)", false, "", 0.0};
    auto t0 = std::chrono::steady_clock::now();
    Check chk;

    std::mt19937 rng(7151403u);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Oracle engine: radial problems on the annulus (1, 3).
    config::ProblemConfig base;
    base.kind = config::DomainKind::Annulus;
    base.inner_radius = expr::parse("1");
    base.outer_radius = expr::parse("3");
    base.lambda = 1.0;
    base.drift = fem::RadialDrift{expr::parse("1/r")};
    base.h = expr::parse("1 + 0.2*sin(r)");
    base.components = 2;
    base.engine = "oracle";
    base.n_points = 2048;

    double worst_oracle = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        auto cfg = base;
        auto radial_weight = [&]() {
            double a = 0.05 + 0.2 * unit(rng);
            double beta = 0.2 + unit(rng);
            double gamma = 0.5 + 2.0 * unit(rng);
            return fmt("%.17g*exp(-%.17g*r)*(1 + 0.5*sin(%.17g*r))", a, beta, gamma);
        };
        cfg.weight_sources = {radial_weight(), radial_weight()};
        cfg.weights = {expr::parse(cfg.weight_sources[0]), expr::parse(cfg.weight_sources[1])};
        cfg.b = {4.0 * unit(rng) - 2.0, 4.0 * unit(rng) - 2.0};
        cfg.validate();

        auto inst = pipeline::oracle_instance(cfg, cfg.lambda);
        auto cls = nonlocal::classify(inst.system, pipeline::eps_det_for(cfg, inst.system));
        chk.require(cls.kind == nonlocal::Kind::Unique,
                    fmt("oracle trial %d not Unique (%s)", trial, kind_name(cls.kind)));
        if (cls.kind != nonlocal::Kind::Unique) continue;
        double resid = pipeline::oracle_fixed_point_residual(cfg, inst, cls.coefficients);
        double bnorm = std::max(std::fabs(cfg.b[0]), std::fabs(cfg.b[1]));
        worst_oracle = std::max(worst_oracle, resid / (1.0 + bnorm));
        chk.require(resid <= 1e-9 * (1.0 + bnorm),
                    fmt("oracle trial %d residual %.3g", trial, resid));
    }

    // FEM engine on a fixed annulus mesh.
    geom::MeshPtr mesh = std::make_shared<const geom::Mesh>(geom::generate_annulus_mesh(1.0, 2.5, 32, 64));
    const double lambda = 2.5;
    fem::CoefficientField coeffs(expr::parse("1"), fem::RadialDrift{expr::parse("1/r")}, lambda);
    fem::BasisSolutionSet basis = fem::basis_solutions(mesh, coeffs);

    double worst_fem = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        auto field_weight = [&]() {
            double a = 0.02 + 0.1 * unit(rng);
            double beta = 0.2 + unit(rng);
            double p = 0.5 + 2.0 * unit(rng), q = 2.0 * kPi * unit(rng);
            return expr::parse(fmt("%.17g*exp(-%.17g*r)*(1 + 0.5*sin(%.17g*x + %.17g))", a, beta, p, q));
        };
        std::vector<expr::Expr> weights{field_weight(), field_weight()};
        std::vector<double> b{4.0 * unit(rng) - 2.0, 4.0 * unit(rng) - 2.0};
        auto sys = nonlocal::build_system(basis, weights, b, lambda);
        auto cls = nonlocal::classify(sys);
        chk.require(cls.kind == nonlocal::Kind::Unique,
                    fmt("fem trial %d not Unique (%s)", trial, kind_name(cls.kind)));
        if (cls.kind != nonlocal::Kind::Unique) continue;
        auto u = nonlocal::reconstruct(basis, cls.coefficients);
        double resid = nonlocal::fixed_point_residual(u, basis, weights, b, lambda);
        worst_fem = std::max(worst_fem, resid);
        chk.require(resid <= 1e-6, fmt("fem trial %d residual %.3g", trial, resid));
    }
    chk.note(fmt("worst oracle residual/(1+|b|) = %.2e, worst fem residual = %.2e", worst_oracle,
                 worst_fem));

    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.passed = chk.passed();
    res.detail = chk.detail();
    return res;
}

// ---------------------------------------------------------------- C9
// Interior decay of Example 2 solutions at a non-critical C0 = 0.5.
CriterionResult criterion9() {
    CriterionResult res{9, "Decay envelope across lambda", false, "", 0.0};
    auto t0 = std::chrono::steady_clock::now();
    Check chk;

    const double c0 = 0.5;
    const double kappa = 0.01;
    const double lambdas[3] = {5.0, 10.0, 20.0};
    double midpoint_abs[3];
    double m_star[3];

    for (int k = 0; k < 3; ++k) {
        double lam = lambdas[k];
        auto cfg = example2_config("fem", c0, 2);
        auto inst = pipeline::fem_instance(cfg, lam);
        auto cls = nonlocal::classify(inst.system, pipeline::eps_det_for(cfg, inst.system));
        chk.require(cls.kind == nonlocal::Kind::Unique,
                    fmt("lambda=%g not Unique (%s)", lam, kind_name(cls.kind)));
        auto u = nonlocal::reconstruct(inst.basis, cls.coefficients);

        // Nodal value nearest the radial midpoint.
        double mid_r = 0.5 * (1.0 + lam);
        double best_d = 1e300, value = 0.0;
        for (int i = 0; i < inst.mesh->node_count(); ++i) {
            const auto& p = inst.mesh->nodes[static_cast<std::size_t>(i)];
            double d = std::hypot(p.x - mid_r, p.y);
            if (d < best_d) {
                best_d = d;
                value = u.values[static_cast<std::size_t>(i)];
            }
        }
        midpoint_abs[k] = std::fabs(value);

        auto env = nonlocal::decay_envelope(u, lam, kappa);
        m_star[k] = env.m_star;
        chk.require(env.m_star > 0.0, fmt("lambda=%g fitted M* = %.4f not positive", lam, env.m_star));
        chk.require(env.max_margin <= 1e-9,
                    fmt("lambda=%g envelope margin %.3g above 1e-9", lam, env.max_margin));
    }
    chk.require(midpoint_abs[0] > midpoint_abs[1] && midpoint_abs[1] > midpoint_abs[2],
                fmt("midpoint |u| not monotone: %.3e, %.3e, %.3e", midpoint_abs[0], midpoint_abs[1],
                    midpoint_abs[2]));
    double lo = std::min({m_star[0], m_star[1], m_star[2]});
    double hi = std::max({m_star[0], m_star[1], m_star[2]});
    chk.require(lo > 0.0 && hi / lo <= 2.0, fmt("M* spread %.3f..%.3f beyond factor 2", lo, hi));
    chk.note(fmt("midpoint |u| = (%.2e, %.2e, %.2e), M* = (%.3f, %.3f, %.3f)", midpoint_abs[0],
                 midpoint_abs[1], midpoint_abs[2], m_star[0], m_star[1], m_star[2]));

    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.passed = chk.passed();
    res.detail = chk.detail();
    return res;
}

// ---------------------------------------------------------------- C10
CriterionResult criterion10() {
    CriterionResult res{10, "Determinant factorization and quadrature cross-check", false, "", 0.0};
    auto t0 = std::chrono::steady_clock::now();
    Check chk;

    std::mt19937 rng(90125u);
    std::uniform_real_distribution<double> pick(1.5, 20.0);
    const double c0 = oracle::example2_critical_c0();
    double worst_identity = 0.0, worst_quadrature = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        double lam = pick(rng);
        double closed = oracle::example2_det(lam, c0);
        double factored = oracle::example2_det_factored(lam);
        worst_identity = std::max(worst_identity, std::fabs(closed - factored));

        double denom = std::exp(-1.0) - std::exp(-2.0 * lam + 1.0);
        double quad = 2.0 * kPi * c0 / denom *
                      oracle::adaptive_simpson(
                          [lam](double r) {
                              return (std::exp(-r) - std::exp(-2.0 * lam + r)) * std::exp(-r) *
                                     std::sin(r);
                          },
                          1.0, lam, 1e-13);
        worst_quadrature = std::max(worst_quadrature,
                                    std::fabs(quad - oracle::example2_integral(lam, c0)));
    }
    chk.require(worst_identity <= 1e-12, fmt("identity gap %.3g above 1e-12", worst_identity));
    chk.require(worst_quadrature <= 1e-10, fmt("quadrature gap %.3g above 1e-10", worst_quadrature));
    chk.note(fmt("max |closed - factored| = %.2e, max quadrature gap = %.2e", worst_identity,
                 worst_quadrature));

    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.passed = chk.passed();
    res.detail = chk.detail();
    return res;
}

// ---------------------------------------------------------------- C11
CriterionResult criterion11() {
    CriterionResult res{11, "Multi-component domain (three boundary components)", false, "", 0.0};
    auto t0 = std::chrono::steady_clock::now();
    Check chk;

    // Build the three-component mesh (annulus with a punched hole) and
    // pass it through the file format once.
    geom::Mesh punched = geom::punch_hole(geom::generate_annulus_mesh(0.6, 3.0, 48, 96),
                                          {1.8, 0.0}, 0.35, 2);
    auto path = std::filesystem::temp_directory_path() / "nlbvp_three_component.mesh";
    geom::write_mesh_file(punched, path.string());
    geom::MeshPtr mesh = std::make_shared<const geom::Mesh>(geom::read_mesh_file(path.string()));
    chk.require(mesh->component_count() == 3,
                fmt("expected 3 components, got %d", mesh->component_count()));

    fem::CoefficientField coeffs(expr::parse("1"), fem::CoefficientField::drift_preset("zero"));
    fem::BasisSolutionSet basis = fem::basis_solutions(mesh, coeffs);
    double excess = basis.max_principle_excess();
    chk.require(excess == 0.0, fmt("maximum-principle excess %.3g", excess));

    // Zero weights: the classification reduces to the Dirichlet case.
    std::vector<expr::Expr> zero{expr::parse("0"), expr::parse("0"), expr::parse("0")};
    std::vector<double> b{0.3, 0.7, -0.2};
    auto sys0 = nonlocal::build_system(basis, zero, b);
    auto cls0 = nonlocal::classify(sys0);
    chk.require(cls0.kind == nonlocal::Kind::Unique, "zero-weight system not Unique");
    if (cls0.kind == nonlocal::Kind::Unique) {
        double gap = 0.0;
        for (int i = 0; i < 3; ++i)
            gap = std::max(gap, std::fabs(cls0.coefficients[static_cast<std::size_t>(i)] -
                                          b[static_cast<std::size_t>(i)]));
        chk.require(gap <= 1e-12, fmt("B differs from b by %.3g", gap));
    }

    // Small weights: classify, reconstruct, and close the fixed point.
    std::vector<expr::Expr> small{expr::parse("0.05"), expr::parse("0.1*exp(-r)"),
                                  expr::parse("0.02*(2 + sin(x))")};
    auto sys1 = nonlocal::build_system(basis, small, b);
    auto cls1 = nonlocal::classify(sys1);
    chk.require(cls1.kind == nonlocal::Kind::Unique, "small-weight system not Unique");
    if (cls1.kind == nonlocal::Kind::Unique) {
        auto u = nonlocal::reconstruct(basis, cls1.coefficients);
        double resid = nonlocal::fixed_point_residual(u, basis, small, b);
        chk.require(resid <= 1e-6, fmt("fixed-point residual %.3g above 1e-6", resid));
        chk.note(fmt("nodes=%d, det=%.6f, residual=%.2e", mesh->node_count(), sys1.det, resid));
    }

    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.passed = chk.passed();
    res.detail = chk.detail();
    return res;
}

}  // namespace

std::vector<CriterionResult> run_all(std::ostream& log) {
    std::vector<CriterionResult> results;
    results.push_back(criterion1());
    results.push_back(criterion2());
    results.push_back(criterion3());
    results.push_back(criterion4());
    results.push_back(criterion5());
    results.push_back(criterion6());
    results.push_back(criterion7());
    results.push_back(criterion8());
    results.push_back(criterion9());
    results.push_back(criterion10());
    results.push_back(criterion11());

    for (const CriterionResult& r : results) {
        log << (r.passed ? "[PASS]" : "[FAIL]") << " criterion " << r.id << ": " << r.title
            << " (" << fmt("%.2f", r.seconds) << "s)";
        if (!r.detail.empty()) log << " -- " << r.detail;
        log << "\n";
    }
    log.flush();
    return results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.passed) return false;
    return !results.empty();
}

}  // namespace nlbvp::acceptance
