#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlbvp/expr.hpp"
#include "nlbvp/fem.hpp"
#include "nlbvp/geometry.hpp"

namespace nlbvp::nonlocal {

// Linear system behind the non-local boundary conditions. Components are
// indexed by boundary tag: 0 is the outer component, 1..m the inner
// ones. entries(i, j) = integral of g_i * basis_j over the domain, and a
// solution has boundary value B_tag on component tag with
// (I - R) B = b.
struct NonlocalSystem {
    int size = 0;
    std::vector<double> r_entries;  // row-major (size x size)
    std::vector<double> b;
    double det = 0.0;               // det(I - R)
    double cond = 0.0;              // 1-norm condition estimate of I - R
    // Two-component case only: Cramer numerators for the inner and
    // outer coefficients.
    std::optional<double> det_c_psi;
    std::optional<double> det_c_phi;

    double r(int i, int j) const { return r_entries[static_cast<std::size_t>(i * size + j)]; }
};

enum class Kind { Unique, InfinitelyMany, NoSolution, Degenerate };

const char* kind_name(Kind k);

struct Classification {
    Kind kind = Kind::Unique;
    std::vector<double> coefficients;  // Unique: B; InfinitelyMany: particular solution
    std::vector<double> kernel;        // InfinitelyMany: direction of ker(I - R)
    double residual = 0.0;             // Unique: |(I-R)B - b|
    double cond = 0.0;
    double eps_det = 0.0;              // threshold actually used
};

// Default determinant threshold: 1e-9 * (1 + max row sum of R).
double default_eps_det(const NonlocalSystem& sys);

// Builds the interaction matrix from the basis solutions; one weight
// expression per component tag.
NonlocalSystem build_system(const fem::BasisSolutionSet& basis,
                            const std::vector<expr::Expr>& weights,
                            const std::vector<double>& b,
                            std::optional<double> lambda = std::nullopt);

// Matrix-level constructor shared with the radial-oracle engine:
// r_entries is row-major.
NonlocalSystem make_system(int size, std::vector<double> r_entries, std::vector<double> b);

// |det| > eps_det: Unique with (I-R)B = b. Otherwise a rank test on
// [I-R | b] decides InfinitelyMany vs NoSolution; singular values
// straddling the threshold give Degenerate.
Classification classify(const NonlocalSystem& sys, double eps_det);
Classification classify(const NonlocalSystem& sys);

// Nodal linear combination sum coefficients[tag] * basis[tag].
fem::DiscreteField reconstruct(const fem::BasisSolutionSet& basis,
                               const std::vector<double>& coefficients);

// Largest violation of the boundary identity
//   u|_{component tag} = b[tag] + integral g_tag * u
// over all components. The trace of u must be constant (to 1e-10) on
// each component; otherwise throws NonConstantTrace.
double fixed_point_residual(const fem::DiscreteField& u, const fem::BasisSolutionSet& basis,
                            const std::vector<expr::Expr>& weights, const std::vector<double>& b,
                            std::optional<double> lambda = std::nullopt);

struct SufficientConditionReport {
    double abs_integral_total = 0.0;      // integral of |g_0| + |g_1|
    std::vector<double> integrals;        // signed integral per component
    std::vector<double> abs_integrals;    // integral of |g| per component
    bool all_non_negative = true;
    bool smallness_holds = false;         // total <= 1: det(I - R) > 0 guaranteed
    bool nonneg_holds = false;            // g >= 0, each integral < 1: never InfinitelyMany
};

// Checks the two sufficient conditions for the two-component problem.
SufficientConditionReport check_sufficient_conditions(const geom::Mesh& mesh,
                                                      const std::vector<expr::Expr>& weights,
                                                      std::optional<double> lambda = std::nullopt);

struct DecayEnvelope {
    double kappa = 0.0;
    double c_star = 0.0;   // multiplicative constant (majorizes all nodes)
    double m_star = 0.0;   // fitted decay rate
    std::vector<double> margins;  // log|u| - log(envelope) per sampled node
    double max_margin = 0.0;
    int nodes_used = 0;
};

// Fits |u(x)| <= C* exp(-M* lambda^{-kappa/2} dist(x, boundary)).
// The rate comes from a least-squares fit over the per-distance-bin
// maxima of log|u| (the bound is one-sided, so the fit follows the
// binding profile); C* is then inflated so the envelope majorizes every
// node. Nodes within one mesh cell of the boundary or with |u| <= 1e-14
// are excluded from the fit. Throws AllZeroField when nothing remains.
DecayEnvelope decay_envelope(const fem::DiscreteField& u, double lambda, double kappa);

}  // namespace nlbvp::nonlocal
