#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlbvp/expr.hpp"
#include "nlbvp/fem.hpp"

namespace nlbvp::config {

enum class DomainKind { Annulus, Mesh };

// Parsed and validated problem description. Sections mirror the config
// file format; see configs/ for annotated examples. Boundary data is in
// tag order: index 0 is the outer component, 1..m the inner ones.
struct ProblemConfig {
    // [domain]
    DomainKind kind = DomainKind::Annulus;
    expr::Expr inner_radius;  // function of lambda
    expr::Expr outer_radius;
    std::string mesh_path;
    int dimension = 2;
    double lambda = 1.0;

    // [coefficients]
    fem::DriftSpec drift = fem::CartesianDrift{expr::parse("0"), expr::parse("0")};
    expr::Expr h = expr::parse("1");

    // [boundary]
    int components = 2;
    std::vector<double> b;
    std::vector<expr::Expr> weights;
    std::vector<std::string> weight_sources;

    // [discretization]
    int nr = 16;
    int ntheta = 32;
    int refinements = 0;
    int n_points = 2048;

    // [sweep]
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    int steps = 0;
    double tol = 1e-6;
    std::string engine = "fem";

    // [classify]
    std::optional<double> eps_det;  // absent: 1e-9 * (1 + |R|_inf)
    double kappa = 0.01;

    // [oracle] Closed-form family used by the oracle engine: 0 = generic
    // radial finite differences, 1 or 2 = the corresponding example.
    int example = 0;
    double example1_g = 0.0;
    std::optional<double> c0;  // Example 2 constant; absent = critical

    void validate() const;

    // Drift profile as a radial expression; empty when the drift is
    // Cartesian (then the oracle engine cannot be used).
    const expr::Expr* radial_drift() const;
};

ProblemConfig parse_config(const std::string& text, const std::string& filename = "<config>");
ProblemConfig load_config_file(const std::string& path);

}  // namespace nlbvp::config
