#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tieq {

// ---------------------------------------------------------------------------
// Error hierarchy. Domain violations throw std::domain_error; everything a
// solver can hit at runtime derives from SolverError so callers can map the
// whole family to one exit code.
// ---------------------------------------------------------------------------

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularGain : SolverError {
    double t;
    double condition;
    SingularGain(double t_, double cond)
        : SolverError("singular feedback gain bracket at t=" + std::to_string(t_) +
                      " (condition number " + std::to_string(cond) + ")"),
          t(t_), condition(cond) {}
};

struct NoConvergence : SolverError {
    int iterations;
    double defect;
    NoConvergence(const std::string& what_, int iters, double defect_)
        : SolverError(what_), iterations(iters), defect(defect_) {}
};

struct UnboundedKernel : SolverError {
    using SolverError::SolverError;
};

struct Blowup : SolverError {
    std::size_t path;
    std::size_t step;
    Blowup(std::size_t path_, std::size_t step_)
        : SolverError("path blow-up: |X| exceeded 1e9 on path " + std::to_string(path_) +
                      " at step " + std::to_string(step_)),
          path(path_), step(step_) {}
};

struct NotControlFreeDiffusion : SolverError {
    NotControlFreeDiffusion()
        : SolverError("grid solver requires control-free diffusion sigma = sigma(t,x)") {}
};

struct BoundarySpecError : SolverError {
    BoundarySpecError() : SolverError("no boundary rule supplied for the spatial grid") {}
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VerificationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Small numeric utilities
// ---------------------------------------------------------------------------

// Pairwise (cascade) summation; deterministic and independent of the degree
// of parallelism used to fill the input.
double pairwise_sum(std::span<const double> xs);

struct MeanStderr {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

MeanStderr mean_stderr(std::span<const double> xs);

// Linear interpolation on a strictly increasing abscissa, clamped at the ends.
double lerp_on_grid(std::span<const double> xs, std::span<const double> ys, double x);

// index of the interval [xs[k], xs[k+1]) containing x, clamped to [0, n-2]
std::size_t bracket_index(std::span<const double> xs, double x);

// Least-squares slope of log(y) vs log(x); used for empirical convergence orders.
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

// Run fn(i) for i in [0, n) on up to n_threads threads over contiguous blocks.
// n_threads <= 1 runs inline. Work items must write to disjoint state.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& block_fn,
                  int n_threads);

}  // namespace tieq
