#include "nlbvp/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace nlbvp::pipeline {

namespace {

constexpr double kPi = std::numbers::pi;

double eval_radius(const expr::Expr& e, double lambda) {
    expr::Bindings env;
    env.lambda(lambda);
    return e.eval(env);
}

expr::Expr constant_expr(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (v < 0.0) s = "0 - " + s.substr(1);  // keep the grammar happy
    return expr::parse(s);
}

// Example 1 outer basis on (lambda, 2 lambda): sinh(r - lambda)/sinh(lambda),
// written in overflow-safe form.
double example1_psi(double r, double lambda) {
    return (std::exp(r - 2.0 * lambda) - std::exp(-r)) / (1.0 - std::exp(-2.0 * lambda));
}

// Example 1 inner basis: (e^r - e^{4 lambda - r})/(e^lambda - e^{3 lambda}).
double example1_phi(double r, double lambda) {
    return (std::exp(r - 3.0 * lambda) - std::exp(lambda - r)) / (std::exp(-2.0 * lambda) - 1.0);
}

oracle::RadialGridFunction sample_radial(double r1, double r2, int n,
                                         const std::function<double(double)>& f) {
    oracle::RadialGridFunction g;
    g.r1 = r1;
    g.r2 = r2;
    n += n % 2;
    g.values.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) g.values[static_cast<std::size_t>(i)] = f(g.radius(i));
    return g;
}

}  // namespace

Engine engine_from_string(const std::string& name) {
    if (name == "fem") return Engine::Fem;
    if (name == "oracle") return Engine::Oracle;
    throw InvariantViolation("unknown engine '" + name + "'");
}

const char* engine_name(Engine e) { return e == Engine::Fem ? "fem" : "oracle"; }

geom::MeshPtr build_mesh(const config::ProblemConfig& cfg, double lambda) {
    if (!(lambda > 0.0)) throw InvalidLambda("lambda must be positive");
    geom::Mesh mesh;
    if (cfg.kind == config::DomainKind::Annulus) {
        double r1 = eval_radius(cfg.inner_radius, lambda);
        double r2 = eval_radius(cfg.outer_radius, lambda);
        mesh = geom::generate_annulus_mesh(r1, r2, cfg.nr, cfg.ntheta);
    } else {
        mesh = geom::read_mesh_file(cfg.mesh_path);
        if (lambda != 1.0) mesh = geom::scale_mesh(mesh, lambda);
    }
    for (int i = 0; i < cfg.refinements; ++i) mesh = geom::refine(mesh);
    return std::make_shared<const geom::Mesh>(std::move(mesh));
}

fem::CoefficientField coefficients_at(const config::ProblemConfig& cfg, double lambda) {
    return fem::CoefficientField(cfg.h, cfg.drift, lambda);
}

FemInstance fem_instance(const config::ProblemConfig& cfg, double lambda) {
    FemInstance inst;
    inst.lambda = lambda;
    inst.mesh = build_mesh(cfg, lambda);
    if (inst.mesh->component_count() != cfg.components)
        throw InvariantViolation("mesh has " + std::to_string(inst.mesh->component_count()) +
                                 " boundary components, config declares " +
                                 std::to_string(cfg.components));
    inst.basis = fem::basis_solutions(inst.mesh, coefficients_at(cfg, lambda));
    inst.basis.validate();
    inst.system = nonlocal::build_system(inst.basis, cfg.weights, cfg.b, lambda);
    return inst;
}

std::vector<expr::Expr> oracle_weights(const config::ProblemConfig& cfg) {
    if (cfg.example == 1) {
        return {expr::parse("0"), constant_expr(cfg.example1_g)};
    }
    if (cfg.example == 2) {
        double c0 = cfg.c0.value_or(oracle::example2_critical_c0());
        char buf[80];
        std::snprintf(buf, sizeof buf, "%.17g*exp(-r)*sin(r)/r", c0);
        return {expr::parse("0"), expr::parse(buf)};
    }
    return cfg.weights;
}

OracleInstance oracle_instance(const config::ProblemConfig& cfg, double lambda) {
    OracleInstance inst;
    inst.lambda = lambda;
    inst.dimension = cfg.dimension;

    std::vector<double> entries(4, 0.0);
    if (cfg.example == 2) {
        double c0 = cfg.c0.value_or(oracle::example2_critical_c0());
        inst.dimension = 2;
        inst.basis.push_back(sample_radial(1.0, lambda, cfg.n_points,
                                           [lambda](double r) { return oracle::example2_psi(r, lambda); }));
        inst.basis.push_back(sample_radial(1.0, lambda, cfg.n_points,
                                           [lambda](double r) { return oracle::example2_phi(r, lambda); }));
        // Row 0 (outer weight) vanishes; row 1 is the inner weight
        // integrated against (psi, phi).
        entries[2] = 2.0 * kPi * c0 *
                     oracle::adaptive_simpson(
                         [lambda](double r) {
                             return std::exp(-r) * std::sin(r) * oracle::example2_psi(r, lambda);
                         },
                         1.0, lambda, 1e-13);
        entries[3] = oracle::example2_integral(lambda, c0);
    } else if (cfg.example == 1) {
        double g = cfg.example1_g;
        inst.dimension = 2;
        inst.basis.push_back(sample_radial(lambda, 2.0 * lambda, cfg.n_points,
                                           [lambda](double r) { return example1_psi(r, lambda); }));
        inst.basis.push_back(sample_radial(lambda, 2.0 * lambda, cfg.n_points,
                                           [lambda](double r) { return example1_phi(r, lambda); }));
        entries[2] = g * 2.0 * kPi *
                     oracle::adaptive_simpson(
                         [lambda](double r) { return example1_psi(r, lambda) * r; }, lambda,
                         2.0 * lambda, 1e-13);
        entries[3] = g * oracle::example1_basis_integral(lambda);
    } else {
        const expr::Expr* alpha = cfg.radial_drift();
        if (alpha == nullptr)
            throw InvariantViolation("the oracle engine needs a radial drift");
        double r1 = eval_radius(cfg.inner_radius, lambda);
        double r2 = eval_radius(cfg.outer_radius, lambda);
        oracle::RadialProblem p;
        p.r1 = r1;
        p.r2 = r2;
        p.dimension = cfg.dimension;
        p.alpha = *alpha;
        p.h = cfg.h;
        p.lambda = lambda;
        p.value_inner = 0.0;
        p.value_outer = 1.0;
        inst.basis.push_back(oracle::radial_solve(p, cfg.n_points));  // tag 0: outer
        p.value_inner = 1.0;
        p.value_outer = 0.0;
        inst.basis.push_back(oracle::radial_solve(p, cfg.n_points));  // tag 1: inner
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                entries[static_cast<std::size_t>(2 * i + j)] = oracle::radial_weighted_integral(
                    inst.basis[static_cast<std::size_t>(j)], cfg.weights[static_cast<std::size_t>(i)],
                    cfg.dimension, lambda);
    }
    inst.system = nonlocal::make_system(2, std::move(entries), cfg.b);
    return inst;
}

double oracle_fixed_point_residual(const config::ProblemConfig& cfg, const OracleInstance& inst,
                                   const std::vector<double>& coefficients) {
    if (coefficients.size() != inst.basis.size())
        throw DimensionMismatch("coefficient count does not match basis count");
    oracle::RadialGridFunction u = inst.basis.front();
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        u.values[i] = 0.0;
        for (std::size_t k = 0; k < coefficients.size(); ++k)
            u.values[i] += coefficients[k] * inst.basis[k].values[i];
    }
    auto weights = oracle_weights(cfg);
    double residual = 0.0;
    for (int tag = 0; tag < 2; ++tag) {
        // Tag 0 is the outer circle (grid end), tag 1 the inner (start).
        double trace = (tag == 0) ? u.values.back() : u.values.front();
        double integral = oracle::radial_weighted_integral(u, weights[static_cast<std::size_t>(tag)],
                                                           inst.dimension, inst.lambda);
        residual = std::max(residual,
                            std::fabs(trace - cfg.b[static_cast<std::size_t>(tag)] - integral));
    }
    return residual;
}

double det_at(const config::ProblemConfig& cfg, Engine engine, double lambda) {
    if (engine == Engine::Oracle) {
        if (cfg.example == 2)
            return oracle::example2_det(lambda, cfg.c0.value_or(oracle::example2_critical_c0()));
        if (cfg.example == 1) return oracle::example1_det(lambda, cfg.example1_g);
        return oracle_instance(cfg, lambda).system.det;
    }
    return fem_instance(cfg, lambda).system.det;
}

nonlocal::NonlocalSystem system_at(const config::ProblemConfig& cfg, Engine engine, double lambda) {
    if (engine == Engine::Oracle) return oracle_instance(cfg, lambda).system;
    return fem_instance(cfg, lambda).system;
}

double eps_det_for(const config::ProblemConfig& cfg, const nonlocal::NonlocalSystem& sys) {
    return cfg.eps_det ? *cfg.eps_det : nonlocal::default_eps_det(sys);
}

}  // namespace nlbvp::pipeline
