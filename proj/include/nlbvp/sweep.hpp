#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nlbvp/pipeline.hpp"

namespace nlbvp::sweep {

struct SweepRecord {
    double lambda = 0.0;
    bool ok = false;
    double det = 0.0;
    std::string classification;        // kind name, or "Error:<message>"
    std::vector<double> coefficients;  // filled in the Unique regime
    double cond = 0.0;
    double seconds = 0.0;
};

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
};

struct SweepResult {
    std::vector<SweepRecord> records;  // sorted by lambda
    std::vector<Bracket> brackets;     // consecutive sign changes of det
};

// Uniform grid over (lambda_min, lambda_max]: for every grid point the
// problem is rebuilt at that lambda, solved with the requested engine and
// classified. A failing point is recorded with an error tag and the sweep
// continues. `jobs` > 1 evaluates grid points concurrently; the record
// order stays deterministic.
SweepResult sweep_lambda(const config::ProblemConfig& cfg, double lambda_min, double lambda_max,
                         int steps, pipeline::Engine engine, int jobs = 1);

// Bisection on lambda -> det(I - R_lambda) down to |bracket| <= tol.
// Throws NoSignChange when det has the same sign at both ends.
double refine_root(const config::ProblemConfig& cfg, pipeline::Engine engine, Bracket bracket,
                   double tol);

}  // namespace nlbvp::sweep
