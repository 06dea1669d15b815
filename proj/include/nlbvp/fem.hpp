#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nlbvp/expr.hpp"
#include "nlbvp/geometry.hpp"

namespace nlbvp::fem {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Convection field given componentwise.
struct CartesianDrift {
    expr::Expr ax;
    expr::Expr ay;
};

// Convection field alpha(r) * x/|x| for a radial profile alpha.
struct RadialDrift {
    expr::Expr alpha;
};

using DriftSpec = std::variant<CartesianDrift, RadialDrift>;

// Reaction h and drift a of the operator -Laplace + a.grad + h, evaluated
// at points of one fixed lambda-instance of the problem. The coefficient
// expressions may reference x, y, r and lambda.
class CoefficientField {
public:
    CoefficientField(expr::Expr h, DriftSpec a, std::optional<double> lambda = std::nullopt)
        : h_(std::move(h)), a_(std::move(a)), lambda_(lambda) {}

    // Named presets for the drift: "zero" and "unit-radial-drift"
    // (a = x/|x|^2, the Example coefficients).
    static DriftSpec drift_preset(const std::string& name);

    double h_at(double x, double y) const;
    Vec2 a_at(double x, double y) const;
    std::optional<double> lambda() const { return lambda_; }

private:
    expr::Expr h_;
    DriftSpec a_;
    std::optional<double> lambda_;
};

// One real value per mesh node.
struct DiscreteField {
    geom::MeshPtr mesh;
    std::vector<double> values;

    void validate() const;
};

// Solutions of the Dirichlet problem with data 1 on one boundary
// component and 0 on the others, indexed by component tag.
struct BasisSolutionSet {
    geom::MeshPtr mesh;
    std::vector<DiscreteField> fields;  // fields[tag]

    // Discrete maximum principle surrogate: every nodal value within
    // [-1e-8, 1+1e-8] and the pointwise sum of all fields <= 1+1e-8.
    void validate() const;

    // Largest excursion outside the admissible band (0 when clean).
    double max_principle_excess() const;
};

// Piecewise-linear Galerkin solution of
//   -Laplace(u) + a.grad(u) + h u = 0,  u = boundary_values[tag] on each
// component. Dirichlet values are imposed exactly; the reduced
// nonsymmetric system is solved by sparse LU to relative residual 1e-12.
DiscreteField solve_dirichlet(const geom::MeshPtr& mesh, const CoefficientField& coeffs,
                              const std::vector<double>& boundary_values);

// All component basis solutions from a single factorization.
BasisSolutionSet basis_solutions(const geom::MeshPtr& mesh, const CoefficientField& coeffs);

// Quadrature (3-point mid-edge rule, exact for quadratics) of
// weight(x) * field(x) over the mesh.
double integrate_weighted(const geom::Mesh& mesh, const expr::Expr& weight,
                          const DiscreteField& field,
                          std::optional<double> lambda = std::nullopt);

// Integral of |weight| over the mesh (same quadrature). Also reports
// whether the weight is non-negative at every quadrature point.
struct WeightIntegral {
    double integral = 0.0;       // integral of the signed weight
    double abs_integral = 0.0;   // integral of |weight|
    bool non_negative = true;
};
WeightIntegral integrate_weight(const geom::Mesh& mesh, const expr::Expr& weight,
                                std::optional<double> lambda = std::nullopt);

// Dirichlet energy of the discrete harmonic function with data 1 on the
// inner component (tag 1) and 0 on the outer (tag 0): the H^1-capacity.
double capacity_fem(const geom::MeshPtr& mesh);

}  // namespace nlbvp::fem
