#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlbvp/config.hpp"
#include "nlbvp/fem.hpp"
#include "nlbvp/geometry.hpp"
#include "nlbvp/nonlocal.hpp"
#include "nlbvp/radial_oracle.hpp"

namespace nlbvp::pipeline {

enum class Engine { Fem, Oracle };

Engine engine_from_string(const std::string& name);
const char* engine_name(Engine e);

// Mesh for one lambda: annulus radii evaluated at lambda, generated at
// (nr, ntheta) and refined `refinements` times; or the external mesh
// scaled by lambda.
geom::MeshPtr build_mesh(const config::ProblemConfig& cfg, double lambda);

fem::CoefficientField coefficients_at(const config::ProblemConfig& cfg, double lambda);

// Full FEM pipeline state for one lambda.
struct FemInstance {
    double lambda = 0.0;
    geom::MeshPtr mesh;
    fem::BasisSolutionSet basis;
    nonlocal::NonlocalSystem system;
};
FemInstance fem_instance(const config::ProblemConfig& cfg, double lambda);

// Radial-oracle pipeline state for one lambda. Basis grid functions are
// indexed by tag (0 = outer, 1 = inner). For the closed-form examples
// the determinant entry uses the transcribed integral; the off-diagonal
// entry is evaluated by adaptive quadrature of the closed-form basis.
struct OracleInstance {
    double lambda = 0.0;
    int dimension = 2;
    std::vector<oracle::RadialGridFunction> basis;
    nonlocal::NonlocalSystem system;
};
OracleInstance oracle_instance(const config::ProblemConfig& cfg, double lambda);

// Effective weight expressions seen by the oracle engine (the examples
// carry their own built-in weights).
std::vector<expr::Expr> oracle_weights(const config::ProblemConfig& cfg);

// Fixed-point closure of a radial reconstruction u = sum B_tag basis_tag:
// max over components of |u|_Gamma - b - integral(g u)|.
double oracle_fixed_point_residual(const config::ProblemConfig& cfg, const OracleInstance& inst,
                                   const std::vector<double>& coefficients);

// det(I - R_lambda) alone; for the closed-form examples this avoids all
// quadrature, which keeps root bisection exact and fast.
double det_at(const config::ProblemConfig& cfg, Engine engine, double lambda);

nonlocal::NonlocalSystem system_at(const config::ProblemConfig& cfg, Engine engine, double lambda);

// eps_det from the config when set, the relative default otherwise.
double eps_det_for(const config::ProblemConfig& cfg, const nonlocal::NonlocalSystem& sys);

}  // namespace nlbvp::pipeline
