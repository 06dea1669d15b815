#include "nlbvp/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace nlbvp::sweep {

namespace {

SweepRecord evaluate_point(const config::ProblemConfig& cfg, pipeline::Engine engine, double lambda) {
    SweepRecord rec;
    rec.lambda = lambda;
    auto start = std::chrono::steady_clock::now();
    try {
        nonlocal::NonlocalSystem sys = pipeline::system_at(cfg, engine, lambda);
        nonlocal::Classification cls = nonlocal::classify(sys, pipeline::eps_det_for(cfg, sys));
        rec.ok = true;
        rec.det = sys.det;
        rec.cond = sys.cond;
        rec.classification = nonlocal::kind_name(cls.kind);
        if (cls.kind == nonlocal::Kind::Unique) rec.coefficients = cls.coefficients;
    } catch (const Error& e) {
        rec.ok = false;
        rec.classification = std::string("Error:") + e.what();
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

}  // namespace

SweepResult sweep_lambda(const config::ProblemConfig& cfg, double lambda_min, double lambda_max,
                         int steps, pipeline::Engine engine, int jobs) {
    if (!(lambda_min > 0.0) || !(lambda_min < lambda_max))
        throw InvariantViolation("sweep needs 0 < lambda_min < lambda_max");
    if (steps < 2) throw InvariantViolation("sweep needs at least 2 steps");
    if (jobs < 1) jobs = 1;

    // Grid over (lambda_min, lambda_max]: the left end is excluded so
    // domains like {1 < |x| < lambda} stay non-degenerate at lambda_min = 1.
    std::vector<double> grid(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k)
        grid[static_cast<std::size_t>(k)] =
            lambda_min + (lambda_max - lambda_min) * static_cast<double>(k + 1) / steps;

    SweepResult result;
    result.records.resize(grid.size());
    if (jobs == 1) {
        for (std::size_t k = 0; k < grid.size(); ++k)
            result.records[k] = evaluate_point(cfg, engine, grid[k]);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                std::size_t k = next.fetch_add(1);
                if (k >= grid.size()) return;
                result.records[k] = evaluate_point(cfg, engine, grid[k]);
            }
        };
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (std::size_t k = 0; k + 1 < result.records.size(); ++k) {
        const SweepRecord& a = result.records[k];
        const SweepRecord& b = result.records[k + 1];
        if (a.ok && b.ok && a.det * b.det < 0.0)
            result.brackets.push_back({a.lambda, b.lambda});
    }
    return result;
}

double refine_root(const config::ProblemConfig& cfg, pipeline::Engine engine, Bracket bracket,
                   double tol) {
    if (!(tol > 0.0)) throw InvariantViolation("tolerance must be positive");
    double lo = bracket.lo, hi = bracket.hi;
    double flo = pipeline::det_at(cfg, engine, lo);
    double fhi = pipeline::det_at(cfg, engine, hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0))
        throw NoSignChange("det has the same sign at both bracket endpoints");

    // Bisection: det can be exponentially flat near its roots, where
    // superlinear updates stall on rounding noise.
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        double mid = 0.5 * (lo + hi);
        double fmid = pipeline::det_at(cfg, engine, mid);
        if (fmid == 0.0) return mid;
        if ((fmid < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace nlbvp::sweep
