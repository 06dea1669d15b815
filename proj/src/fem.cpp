#include "nlbvp/fem.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace nlbvp::fem {

namespace {

using geom::Mesh;
using geom::Point;

expr::Bindings point_env(double x, double y, std::optional<double> lambda) {
    expr::Bindings env;
    env.x(x).y(y);
    if (lambda) env.lambda(*lambda);
    return env;
}

[[noreturn]] void rethrow_at_point(const std::exception& e, double x, double y) {
    char buf[96];
    std::snprintf(buf, sizeof buf, " at quadrature point (%.12g, %.12g)", x, y);
    throw CoefficientDomainError(std::string(e.what()) + buf);
}

struct QuadPoint {
    double x, y, weight;
    int edge;  // mid-edge index: 0 = (v0,v1), 1 = (v1,v2), 2 = (v2,v0)
};

// Mid-edge rule: three points, each weighted area/3, exact for quadratics.
std::array<QuadPoint, 3> midedge_rule(const Mesh& mesh, int t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const Point& a = mesh.nodes[static_cast<std::size_t>(tri[0])];
    const Point& b = mesh.nodes[static_cast<std::size_t>(tri[1])];
    const Point& c = mesh.nodes[static_cast<std::size_t>(tri[2])];
    double w = mesh.triangle_area(t) / 3.0;
    return {QuadPoint{0.5 * (a.x + b.x), 0.5 * (a.y + b.y), w, 0},
            QuadPoint{0.5 * (b.x + c.x), 0.5 * (b.y + c.y), w, 1},
            QuadPoint{0.5 * (c.x + a.x), 0.5 * (c.y + a.y), w, 2}};
}

// Barycentric value of nodal basis k at mid-edge q: 1/2 on the two edges
// touching vertex k, 0 on the opposite edge.
double basis_at_midedge(int k, int edge) {
    // Edge 0 joins vertices 0,1; edge 1 joins 1,2; edge 2 joins 2,0.
    static const double table[3][3] = {{0.5, 0.0, 0.5},   // vertex 0
                                       {0.5, 0.5, 0.0},   // vertex 1
                                       {0.0, 0.5, 0.5}};  // vertex 2
    return table[k][edge];
}

struct ElementGeometry {
    double area;
    Vec2 grad[3];  // constant gradients of the three nodal basis functions
};

ElementGeometry element_geometry(const Mesh& mesh, int t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const Point& a = mesh.nodes[static_cast<std::size_t>(tri[0])];
    const Point& b = mesh.nodes[static_cast<std::size_t>(tri[1])];
    const Point& c = mesh.nodes[static_cast<std::size_t>(tri[2])];
    ElementGeometry g{};
    g.area = mesh.triangle_area(t);
    double inv2A = 1.0 / (2.0 * g.area);
    g.grad[0] = {(b.y - c.y) * inv2A, (c.x - b.x) * inv2A};
    g.grad[1] = {(c.y - a.y) * inv2A, (a.x - c.x) * inv2A};
    g.grad[2] = {(a.y - b.y) * inv2A, (b.x - a.x) * inv2A};
    return g;
}

// Assembled Galerkin matrix split into interior-interior and
// interior-boundary blocks, with the node numbering maps.
struct AssembledSystem {
    Eigen::SparseMatrix<double> A_II;
    Eigen::SparseMatrix<double> A_IB;
    std::vector<int> interior_index;  // node -> interior ordinal, -1 on boundary
    std::vector<int> boundary_index;  // node -> boundary ordinal, -1 inside
    std::vector<int> interior_nodes;
    std::vector<int> boundary_nodes;
    std::vector<int> node_tag;        // boundary tag per node, -1 inside
};

AssembledSystem assemble(const Mesh& mesh, const CoefficientField& coeffs) {
    AssembledSystem sys;
    sys.node_tag = mesh.boundary_tag_of_node();
    const int n = mesh.node_count();
    sys.interior_index.assign(static_cast<std::size_t>(n), -1);
    sys.boundary_index.assign(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        if (sys.node_tag[static_cast<std::size_t>(i)] < 0) {
            sys.interior_index[static_cast<std::size_t>(i)] = static_cast<int>(sys.interior_nodes.size());
            sys.interior_nodes.push_back(i);
        } else {
            sys.boundary_index[static_cast<std::size_t>(i)] = static_cast<int>(sys.boundary_nodes.size());
            sys.boundary_nodes.push_back(i);
        }
    }
    if (sys.interior_nodes.empty())
        throw InvariantViolation("mesh has no interior nodes");

    std::vector<Eigen::Triplet<double>> tii, tib;
    tii.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
    tib.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 3);

    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        ElementGeometry g = element_geometry(mesh, t);
        auto quad = midedge_rule(mesh, t);

        double h_q[3];
        Vec2 a_q[3];
        for (int q = 0; q < 3; ++q) {
            try {
                h_q[q] = coeffs.h_at(quad[static_cast<std::size_t>(q)].x, quad[static_cast<std::size_t>(q)].y);
                a_q[q] = coeffs.a_at(quad[static_cast<std::size_t>(q)].x, quad[static_cast<std::size_t>(q)].y);
            } catch (const DomainError& e) {
                rethrow_at_point(e, quad[static_cast<std::size_t>(q)].x, quad[static_cast<std::size_t>(q)].y);
            } catch (const UnboundVariable& e) {
                rethrow_at_point(e, quad[static_cast<std::size_t>(q)].x, quad[static_cast<std::size_t>(q)].y);
            }
            if (!(h_q[q] > 0.0))
                throw InvariantViolation("reaction coefficient h is not positive at a quadrature point");
            double a2 = a_q[q].x * a_q[q].x + a_q[q].y * a_q[q].y;
            if (!(4.0 * h_q[q] - a2 > 0.0))
                throw InvariantViolation("weak-convection condition |a|^2 < 4h violated at a quadrature point");
        }

        double local[3][3] = {};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                // Diffusion: gradients are constant, integral exact.
                double v = g.area * (g.grad[i].x * g.grad[j].x + g.grad[i].y * g.grad[j].y);
                // Convection (a.grad phi_j) phi_i and reaction h phi_i phi_j
                // by the mid-edge rule.
                for (int q = 0; q < 3; ++q) {
                    double phi_i = basis_at_midedge(i, quad[static_cast<std::size_t>(q)].edge);
                    double phi_j = basis_at_midedge(j, quad[static_cast<std::size_t>(q)].edge);
                    double conv = (a_q[q].x * g.grad[j].x + a_q[q].y * g.grad[j].y) * phi_i;
                    v += quad[static_cast<std::size_t>(q)].weight * (conv + h_q[q] * phi_i * phi_j);
                }
                local[i][j] = v;
            }

        for (int i = 0; i < 3; ++i) {
            int ni = tri[static_cast<std::size_t>(i)];
            int row = sys.interior_index[static_cast<std::size_t>(ni)];
            if (row < 0) continue;  // test functions vanish on the boundary
            for (int j = 0; j < 3; ++j) {
                int nj = tri[static_cast<std::size_t>(j)];
                int col_i = sys.interior_index[static_cast<std::size_t>(nj)];
                if (col_i >= 0)
                    tii.emplace_back(row, col_i, local[i][j]);
                else
                    tib.emplace_back(row, sys.boundary_index[static_cast<std::size_t>(nj)], local[i][j]);
            }
        }
    }

    const int ni = static_cast<int>(sys.interior_nodes.size());
    const int nb = static_cast<int>(sys.boundary_nodes.size());
    sys.A_II.resize(ni, ni);
    sys.A_II.setFromTriplets(tii.begin(), tii.end());
    sys.A_IB.resize(ni, nb);
    sys.A_IB.setFromTriplets(tib.begin(), tib.end());
    return sys;
}

class DirichletSolver {
public:
    DirichletSolver(const geom::MeshPtr& mesh, const CoefficientField& coeffs)
        : mesh_(mesh), sys_(assemble(*mesh, coeffs)) {
        lu_.compute(sys_.A_II);
        if (lu_.info() != Eigen::Success)
            throw SingularSystem("sparse LU factorization failed");
        norm_A_ = 0.0;
        for (int k = 0; k < sys_.A_II.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(sys_.A_II, k); it; ++it)
                norm_A_ = std::max(norm_A_, std::fabs(it.value()));
    }

    // Solves with the nodal value boundary_values[tag] on each component.
    DiscreteField solve(const std::vector<double>& boundary_values) const {
        const Mesh& mesh = *mesh_;
        const int components = mesh.component_count();
        if (static_cast<int>(boundary_values.size()) != components)
            throw DimensionMismatch("expected one boundary value per component (" +
                                    std::to_string(components) + ")");

        Eigen::VectorXd g(sys_.boundary_nodes.size());
        for (std::size_t k = 0; k < sys_.boundary_nodes.size(); ++k)
            g[static_cast<Eigen::Index>(k)] =
                boundary_values[static_cast<std::size_t>(sys_.node_tag[static_cast<std::size_t>(sys_.boundary_nodes[k])])];

        Eigen::VectorXd rhs = -(sys_.A_IB * g);
        Eigen::VectorXd u = lu_.solve(rhs);
        if (lu_.info() != Eigen::Success)
            throw SingularSystem("sparse LU solve failed");

        // One step of iterative refinement, then a residual gate.
        Eigen::VectorXd resid = rhs - sys_.A_II * u;
        u += lu_.solve(resid);
        resid = rhs - sys_.A_II * u;
        double scale = norm_A_ * u.cwiseAbs().maxCoeff() + rhs.cwiseAbs().maxCoeff();
        if (scale > 0.0 && resid.cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw SingularSystem("linear solve did not reach the residual tolerance");

        DiscreteField field;
        field.mesh = mesh_;
        field.values.assign(static_cast<std::size_t>(mesh.node_count()), 0.0);
        for (std::size_t k = 0; k < sys_.interior_nodes.size(); ++k)
            field.values[static_cast<std::size_t>(sys_.interior_nodes[k])] = u[static_cast<Eigen::Index>(k)];
        // Boundary values are imposed exactly, not through the solver.
        for (std::size_t k = 0; k < sys_.boundary_nodes.size(); ++k)
            field.values[static_cast<std::size_t>(sys_.boundary_nodes[k])] = g[static_cast<Eigen::Index>(k)];
        return field;
    }

private:
    geom::MeshPtr mesh_;
    AssembledSystem sys_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    double norm_A_ = 0.0;
};

}  // namespace

DriftSpec CoefficientField::drift_preset(const std::string& name) {
    if (name == "zero")
        return CartesianDrift{expr::parse("0"), expr::parse("0")};
    if (name == "unit-radial-drift")
        return RadialDrift{expr::parse("1/r")};  // alpha(r) = 1/r gives a = x/|x|^2
    throw Error("unknown drift preset '" + name + "'");
}

double CoefficientField::h_at(double x, double y) const {
    return h_.eval(point_env(x, y, lambda_));
}

Vec2 CoefficientField::a_at(double x, double y) const {
    auto env = point_env(x, y, lambda_);
    if (const auto* cart = std::get_if<CartesianDrift>(&a_))
        return {cart->ax.eval(env), cart->ay.eval(env)};
    const auto& radial = std::get<RadialDrift>(a_);
    double r = std::hypot(x, y);
    if (r == 0.0)
        throw DomainError("radial drift evaluated at the origin");
    double alpha = radial.alpha.eval(env);
    return {alpha * x / r, alpha * y / r};
}

void DiscreteField::validate() const {
    if (!mesh) throw InvariantViolation("field has no mesh");
    if (values.size() != static_cast<std::size_t>(mesh->node_count()))
        throw InvariantViolation("field length does not match node count");
    for (double v : values)
        if (!std::isfinite(v)) throw InvariantViolation("non-finite field value");
}

void BasisSolutionSet::validate() const {
    double excess = max_principle_excess();
    if (excess > 0.0)
        throw InvariantViolation("basis solutions violate the discrete maximum principle band by " +
                                 std::to_string(excess));
}

double BasisSolutionSet::max_principle_excess() const {
    const double tol = 1e-8;
    double excess = 0.0;
    if (fields.empty()) return 0.0;
    std::size_t n = fields.front().values.size();
    for (const DiscreteField& f : fields) {
        f.validate();
        for (double v : f.values)
            excess = std::max({excess, -v - tol, v - 1.0 - tol});
    }
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (const DiscreteField& f : fields) sum += f.values[i];
        excess = std::max(excess, sum - 1.0 - tol);
    }
    return std::max(0.0, excess);
}

DiscreteField solve_dirichlet(const geom::MeshPtr& mesh, const CoefficientField& coeffs,
                              const std::vector<double>& boundary_values) {
    return DirichletSolver(mesh, coeffs).solve(boundary_values);
}

BasisSolutionSet basis_solutions(const geom::MeshPtr& mesh, const CoefficientField& coeffs) {
    const int components = mesh->component_count();
    if (components < 2)
        throw InvariantViolation("basis solutions need at least two boundary components");
    DirichletSolver solver(mesh, coeffs);
    BasisSolutionSet set;
    set.mesh = mesh;
    for (int tag = 0; tag < components; ++tag) {
        std::vector<double> data(static_cast<std::size_t>(components), 0.0);
        data[static_cast<std::size_t>(tag)] = 1.0;
        set.fields.push_back(solver.solve(data));
    }
    return set;
}

double integrate_weighted(const geom::Mesh& mesh, const expr::Expr& weight,
                          const DiscreteField& field, std::optional<double> lambda) {
    field.validate();
    if (field.values.size() != static_cast<std::size_t>(mesh.node_count()))
        throw DimensionMismatch("field does not match mesh");
    double total = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        auto quad = midedge_rule(mesh, t);
        for (const QuadPoint& q : quad) {
            double w;
            try {
                w = weight.eval(point_env(q.x, q.y, lambda));
            } catch (const DomainError& e) {
                rethrow_at_point(e, q.x, q.y);
            } catch (const UnboundVariable& e) {
                rethrow_at_point(e, q.x, q.y);
            }
            double u = 0.0;
            for (int k = 0; k < 3; ++k)
                u += basis_at_midedge(k, q.edge) * field.values[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
            total += q.weight * w * u;
        }
    }
    return total;
}

WeightIntegral integrate_weight(const geom::Mesh& mesh, const expr::Expr& weight,
                                std::optional<double> lambda) {
    WeightIntegral out;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        auto quad = midedge_rule(mesh, t);
        for (const QuadPoint& q : quad) {
            double w;
            try {
                w = weight.eval(point_env(q.x, q.y, lambda));
            } catch (const DomainError& e) {
                rethrow_at_point(e, q.x, q.y);
            } catch (const UnboundVariable& e) {
                rethrow_at_point(e, q.x, q.y);
            }
            out.integral += q.weight * w;
            out.abs_integral += q.weight * std::fabs(w);
            if (w < 0.0) out.non_negative = false;
        }
    }
    return out;
}

double capacity_fem(const geom::MeshPtr& mesh) {
    if (mesh->component_count() != 2)
        throw InvariantViolation("capacity needs exactly two boundary components");
    // The minimizer is harmonic, so this is a stiffness-only assembly
    // (the h > 0 gate of the general path does not apply to Laplace).
    const Mesh& m = *mesh;
    auto tags = m.boundary_tag_of_node();
    std::vector<int> interior_index(m.nodes.size(), -1);
    std::vector<int> interior_nodes;
    for (int i = 0; i < m.node_count(); ++i)
        if (tags[static_cast<std::size_t>(i)] < 0) {
            interior_index[static_cast<std::size_t>(i)] = static_cast<int>(interior_nodes.size());
            interior_nodes.push_back(i);
        }
    std::vector<Eigen::Triplet<double>> tii;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(interior_nodes.size()));
    std::vector<double> u(m.nodes.size(), 0.0);
    for (int i = 0; i < m.node_count(); ++i)
        if (tags[static_cast<std::size_t>(i)] == 1) u[static_cast<std::size_t>(i)] = 1.0;

    for (int t = 0; t < m.triangle_count(); ++t) {
        const auto& tri = m.triangles[static_cast<std::size_t>(t)];
        ElementGeometry g = element_geometry(m, t);
        for (int i = 0; i < 3; ++i) {
            int row = interior_index[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])];
            if (row < 0) continue;
            for (int j = 0; j < 3; ++j) {
                double k = g.area * (g.grad[i].x * g.grad[j].x + g.grad[i].y * g.grad[j].y);
                int nj = tri[static_cast<std::size_t>(j)];
                int col = interior_index[static_cast<std::size_t>(nj)];
                if (col >= 0)
                    tii.emplace_back(row, col, k);
                else
                    rhs[row] -= k * u[static_cast<std::size_t>(nj)];
            }
        }
    }
    Eigen::SparseMatrix<double> K(static_cast<Eigen::Index>(interior_nodes.size()),
                                  static_cast<Eigen::Index>(interior_nodes.size()));
    K.setFromTriplets(tii.begin(), tii.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success) throw SingularSystem("capacity factorization failed");
    Eigen::VectorXd ui = lu.solve(rhs);
    for (std::size_t k = 0; k < interior_nodes.size(); ++k)
        u[static_cast<std::size_t>(interior_nodes[k])] = ui[static_cast<Eigen::Index>(k)];

    double energy = 0.0;
    for (int t = 0; t < m.triangle_count(); ++t) {
        const auto& tri = m.triangles[static_cast<std::size_t>(t)];
        ElementGeometry g = element_geometry(m, t);
        double gx = 0.0, gy = 0.0;
        for (int k = 0; k < 3; ++k) {
            gx += g.grad[k].x * u[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
            gy += g.grad[k].y * u[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
        }
        energy += g.area * (gx * gx + gy * gy);
    }
    return energy;
}

}  // namespace nlbvp::fem
