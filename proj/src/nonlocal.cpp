#include "nlbvp/nonlocal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlbvp::nonlocal {

namespace {

Eigen::MatrixXd system_matrix(const NonlocalSystem& sys) {
    Eigen::MatrixXd a(sys.size, sys.size);
    for (int i = 0; i < sys.size; ++i)
        for (int j = 0; j < sys.size; ++j)
            a(i, j) = (i == j ? 1.0 : 0.0) - sys.r(i, j);
    return a;
}

Eigen::VectorXd rhs_vector(const NonlocalSystem& sys) {
    Eigen::VectorXd b(sys.size);
    for (int i = 0; i < sys.size; ++i) b[i] = sys.b[static_cast<std::size_t>(i)];
    return b;
}

}  // namespace

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::Unique: return "Unique";
        case Kind::InfinitelyMany: return "InfinitelyMany";
        case Kind::NoSolution: return "NoSolution";
        case Kind::Degenerate: return "Degenerate";
    }
    return "?";
}

double default_eps_det(const NonlocalSystem& sys) {
    double norm = 0.0;
    for (int i = 0; i < sys.size; ++i) {
        double row = 0.0;
        for (int j = 0; j < sys.size; ++j) row += std::fabs(sys.r(i, j));
        norm = std::max(norm, row);
    }
    return 1e-9 * (1.0 + norm);
}

NonlocalSystem make_system(int size, std::vector<double> r_entries, std::vector<double> b) {
    if (size < 1 || r_entries.size() != static_cast<std::size_t>(size) * static_cast<std::size_t>(size) ||
        b.size() != static_cast<std::size_t>(size))
        throw DimensionMismatch("inconsistent nonlocal system dimensions");
    for (double v : r_entries)
        if (!std::isfinite(v)) throw InvariantViolation("non-finite interaction matrix entry");

    NonlocalSystem sys;
    sys.size = size;
    sys.r_entries = std::move(r_entries);
    sys.b = std::move(b);

    Eigen::MatrixXd a = system_matrix(sys);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    sys.det = lu.determinant();
    if (lu.isInvertible()) {
        Eigen::MatrixXd inv = lu.inverse();
        double norm_a = 0.0, norm_inv = 0.0;
        for (int j = 0; j < size; ++j) {
            norm_a = std::max(norm_a, a.col(j).cwiseAbs().sum());
            norm_inv = std::max(norm_inv, inv.col(j).cwiseAbs().sum());
        }
        sys.cond = norm_a * norm_inv;
    } else {
        sys.cond = std::numeric_limits<double>::infinity();
    }

    if (size == 2) {
        // Cramer layouts of the two-component case; tag order is
        // (outer, inner), so the inner coefficient is index 1.
        sys.det_c_psi = sys.b[1] * (1.0 - sys.r(0, 0)) + sys.b[0] * sys.r(1, 0);
        sys.det_c_phi = sys.b[0] * (1.0 - sys.r(1, 1)) + sys.b[1] * sys.r(0, 1);
    }
    return sys;
}

NonlocalSystem build_system(const fem::BasisSolutionSet& basis,
                            const std::vector<expr::Expr>& weights,
                            const std::vector<double>& b, std::optional<double> lambda) {
    const int m1 = static_cast<int>(basis.fields.size());
    if (static_cast<int>(weights.size()) != m1 || static_cast<int>(b.size()) != m1)
        throw DimensionMismatch("need one weight and one datum per boundary component");
    std::vector<double> entries(static_cast<std::size_t>(m1) * static_cast<std::size_t>(m1));
    for (int i = 0; i < m1; ++i)
        for (int j = 0; j < m1; ++j)
            entries[static_cast<std::size_t>(i * m1 + j)] =
                fem::integrate_weighted(*basis.mesh, weights[static_cast<std::size_t>(i)],
                                        basis.fields[static_cast<std::size_t>(j)], lambda);
    return make_system(m1, std::move(entries), b);
}

Classification classify(const NonlocalSystem& sys) { return classify(sys, default_eps_det(sys)); }

Classification classify(const NonlocalSystem& sys, double eps_det) {
    Classification out;
    out.cond = sys.cond;
    out.eps_det = eps_det;

    Eigen::MatrixXd a = system_matrix(sys);
    Eigen::VectorXd b = rhs_vector(sys);

    if (std::fabs(sys.det) > eps_det) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        Eigen::VectorXd x = lu.solve(b);
        double resid = (a * x - b).cwiseAbs().maxCoeff();
        double bnorm = b.cwiseAbs().maxCoeff();
        if (resid > 1e-10 * std::max(1.0, bnorm)) {
            // det cleared the threshold but the solve is untrustworthy.
            out.kind = Kind::Degenerate;
            return out;
        }
        out.kind = Kind::Unique;
        out.coefficients.assign(x.data(), x.data() + x.size());
        out.residual = resid;
        return out;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double smax = sv[0];
    if (smax == 0.0) {
        // I - R is exactly zero only for pathological inputs; the data
        // decides between "every constant vector" and "none".
        out.kind = (b.cwiseAbs().maxCoeff() == 0.0) ? Kind::InfinitelyMany : Kind::NoSolution;
        out.kernel.assign(static_cast<std::size_t>(sys.size), 1.0);
        return out;
    }

    const double tau = eps_det * smax;
    bool ambiguous = false;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv[i] > tau) ++rank;
        if (sv[i] > tau / 3.0 && sv[i] < 3.0 * tau) ambiguous = true;
    }
    if (ambiguous) {
        out.kind = Kind::Degenerate;
        return out;
    }

    // Consistency: does b lie in the range of I - R? Compare the rank of
    // the augmented matrix at the same absolute threshold.
    Eigen::MatrixXd aug(sys.size, sys.size + 1);
    aug.leftCols(sys.size) = a;
    aug.col(sys.size) = b;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_aug(aug);
    int rank_aug = 0;
    for (int i = 0; i < svd_aug.singularValues().size(); ++i)
        if (svd_aug.singularValues()[i] > tau) ++rank_aug;

    if (rank_aug > rank) {
        out.kind = Kind::NoSolution;
        return out;
    }

    out.kind = Kind::InfinitelyMany;
    // Particular solution by truncated SVD, kernel from the smallest
    // right singular vector.
    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.size);
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > tau) x += (svd.matrixU().col(i).dot(b) / sv[i]) * svd.matrixV().col(i);
    out.coefficients.assign(x.data(), x.data() + x.size());
    Eigen::VectorXd k = svd.matrixV().col(sv.size() - 1);
    out.kernel.assign(k.data(), k.data() + k.size());
    return out;
}

fem::DiscreteField reconstruct(const fem::BasisSolutionSet& basis,
                               const std::vector<double>& coefficients) {
    if (coefficients.size() != basis.fields.size())
        throw DimensionMismatch("coefficient count does not match basis count");
    if (basis.fields.empty())
        throw DimensionMismatch("empty basis");
    fem::DiscreteField out;
    out.mesh = basis.mesh;
    out.values.assign(basis.fields.front().values.size(), 0.0);
    for (std::size_t k = 0; k < coefficients.size(); ++k) {
        const auto& f = basis.fields[k].values;
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] += coefficients[k] * f[i];
    }
    return out;
}

double fixed_point_residual(const fem::DiscreteField& u, const fem::BasisSolutionSet& basis,
                            const std::vector<expr::Expr>& weights, const std::vector<double>& b,
                            std::optional<double> lambda) {
    const geom::Mesh& mesh = *basis.mesh;
    if (u.mesh.get() != basis.mesh.get())
        throw DimensionMismatch("field is not defined on the basis mesh");
    const int m1 = mesh.component_count();
    if (static_cast<int>(weights.size()) != m1 || static_cast<int>(b.size()) != m1)
        throw DimensionMismatch("need one weight and one datum per boundary component");

    auto tags = mesh.boundary_tag_of_node();
    double residual = 0.0;
    for (int tag = 0; tag < m1; ++tag) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < mesh.node_count(); ++i)
            if (tags[static_cast<std::size_t>(i)] == tag) {
                lo = std::min(lo, u.values[static_cast<std::size_t>(i)]);
                hi = std::max(hi, u.values[static_cast<std::size_t>(i)]);
            }
        if (!(hi - lo <= 1e-10 * std::max(1.0, std::max(std::fabs(lo), std::fabs(hi)))))
            throw NonConstantTrace("boundary trace varies by " + std::to_string(hi - lo) +
                                   " on component " + std::to_string(tag));
        double trace = 0.5 * (lo + hi);
        double integral = fem::integrate_weighted(mesh, weights[static_cast<std::size_t>(tag)], u, lambda);
        residual = std::max(residual, std::fabs(trace - b[static_cast<std::size_t>(tag)] - integral));
    }
    return residual;
}

SufficientConditionReport check_sufficient_conditions(const geom::Mesh& mesh,
                                                      const std::vector<expr::Expr>& weights,
                                                      std::optional<double> lambda) {
    SufficientConditionReport report;
    for (const auto& w : weights) {
        auto wi = fem::integrate_weight(mesh, w, lambda);
        report.integrals.push_back(wi.integral);
        report.abs_integrals.push_back(wi.abs_integral);
        report.abs_integral_total += wi.abs_integral;
        report.all_non_negative = report.all_non_negative && wi.non_negative;
    }
    report.smallness_holds = report.abs_integral_total <= 1.0;
    bool each_below_one = true;
    for (double v : report.integrals) each_below_one = each_below_one && (v < 1.0);
    report.nonneg_holds = report.all_non_negative && each_below_one;
    return report;
}

DecayEnvelope decay_envelope(const fem::DiscreteField& u, double lambda, double kappa) {
    if (!(kappa > 0.0) || !(kappa < 2.0))
        throw InvariantViolation("kappa must lie in (0, 2)");
    u.validate();
    const geom::Mesh& mesh = *u.mesh;

    double umax = 0.0;
    for (double v : u.values) umax = std::max(umax, std::fabs(v));
    if (umax <= 1e-14) throw AllZeroField("field is identically zero; the bound is vacuous");

    // One-mesh-cell exclusion band next to the boundary.
    double h_cell = 0.0;
    for (const auto& e : mesh.boundary_edges) {
        const auto& pa = mesh.nodes[static_cast<std::size_t>(e.a)];
        const auto& pb = mesh.nodes[static_cast<std::size_t>(e.b)];
        h_cell = std::max(h_cell, std::hypot(pa.x - pb.x, pa.y - pb.y));
    }

    const double rate_scale = std::pow(lambda, -kappa / 2.0);
    struct Sample {
        double s, y;
    };
    std::vector<Sample> all, fit;
    for (int i = 0; i < mesh.node_count(); ++i) {
        double v = std::fabs(u.values[static_cast<std::size_t>(i)]);
        if (v <= 1e-14) continue;
        double d = geom::node_boundary_distance(mesh, i);
        Sample smp{rate_scale * d, std::log(v)};
        all.push_back(smp);
        if (d > h_cell) fit.push_back(smp);
    }
    if (fit.size() < 2) throw AllZeroField("too few interior nodes to fit a decay envelope");

    // The envelope is a one-sided bound: fit the rate through the
    // per-distance-bin maxima of log|u|, not through the full cloud.
    double smin = fit.front().s, smax_v = fit.front().s;
    for (const Sample& smp : fit) {
        smin = std::min(smin, smp.s);
        smax_v = std::max(smax_v, smp.s);
    }
    const int nbins = 32;
    std::vector<double> bin_s(nbins, 0.0), bin_y(nbins, -std::numeric_limits<double>::infinity());
    double width = std::max(smax_v - smin, 1e-300);
    for (const Sample& smp : fit) {
        int bin = std::min(nbins - 1, static_cast<int>((smp.s - smin) / width * nbins));
        if (smp.y > bin_y[static_cast<std::size_t>(bin)]) {
            bin_y[static_cast<std::size_t>(bin)] = smp.y;
            bin_s[static_cast<std::size_t>(bin)] = smp.s;
        }
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int used = 0;
    for (int k = 0; k < nbins; ++k)
        if (std::isfinite(bin_y[static_cast<std::size_t>(k)])) {
            sx += bin_s[static_cast<std::size_t>(k)];
            sy += bin_y[static_cast<std::size_t>(k)];
            sxx += bin_s[static_cast<std::size_t>(k)] * bin_s[static_cast<std::size_t>(k)];
            sxy += bin_s[static_cast<std::size_t>(k)] * bin_y[static_cast<std::size_t>(k)];
            ++used;
        }
    if (used < 2) throw AllZeroField("too few distance bins to fit a decay envelope");
    double denom = used * sxx - sx * sx;
    double slope = (denom != 0.0) ? (used * sxy - sx * sy) / denom : 0.0;

    DecayEnvelope env;
    env.kappa = kappa;
    env.m_star = -slope;
    env.nodes_used = static_cast<int>(fit.size());

    // Inflate C* so the envelope majorizes every node (including the
    // excluded boundary band).
    double log_c = -std::numeric_limits<double>::infinity();
    for (const Sample& smp : all) log_c = std::max(log_c, smp.y + env.m_star * smp.s);
    env.c_star = std::exp(log_c);
    env.margins.reserve(all.size());
    double margin = -std::numeric_limits<double>::infinity();
    for (const Sample& smp : all) {
        env.margins.push_back(smp.y - (log_c - env.m_star * smp.s));
        margin = std::max(margin, env.margins.back());
    }
    env.max_margin = margin;
    return env;
}

}  // namespace nlbvp::nonlocal
