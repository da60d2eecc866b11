#pragma once

#include "tieq/field.hpp"
#include "tieq/model.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace tieq::mc {

// Counter-based normal generator keyed by (seed, path, step, substream):
// stateless, so path results never depend on thread scheduling.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
    double normal(std::uint64_t path, std::uint64_t step, std::uint64_t sub = 0) const;
    double uniform(std::uint64_t path, std::uint64_t step, std::uint64_t sub = 0) const;

private:
    std::uint64_t seed_;
};

enum class Scheme { Euler, LogEuler };

// Feedback policies, all mapping (t, x) to an m-dimensional control.
class Policy {
public:
    using Fn = std::function<void(double t, double x, std::span<double> u_out)>;

    static Policy constant(std::vector<double> u);
    static Policy generic(int m, Fn fn);
    // u_i = gain_i(t) * x; the linear form log-Euler relies on
    static Policy linear_gain(int m, std::function<void(double t, std::span<double>)> gains);
    static Policy from_grid(const PolicyGrid& grid);  // bilinear interpolation

    int dim() const { return m_; }
    void eval(double t, double x, std::span<double> u_out) const { fn_(t, x, u_out); }

private:
    int m_ = 1;
    Fn fn_;
};

struct PathBundle {
    double t0 = 0.0;
    double x0 = 0.0;
    double dt = 1e-3;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    int control_dim = 1;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::Euler;

    std::vector<double> states;    // n_paths x (n_steps+1)
    std::vector<double> controls;  // n_paths x n_steps x control_dim

    double time(std::size_t step) const { return t0 + dt * static_cast<double>(step); }
    double state(std::size_t path, std::size_t step) const {
        return states[path * (n_steps + 1) + step];
    }
    std::span<const double> control(std::size_t path, std::size_t step) const {
        return {controls.data() + (path * n_steps + step) * control_dim,
                static_cast<std::size_t>(control_dim)};
    }
};

struct SimOptions {
    Scheme scheme = Scheme::Euler;
    int n_threads = 1;
    double blowup_bound = 1e9;
};

PathBundle simulate_paths(const GeneralModel& model, const Policy& policy, double t0, double x0,
                          std::size_t n_paths, double dt, std::uint64_t seed,
                          const SimOptions& opts = {});

struct CostEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    double tau_index = 0.0;
};

CostEstimate estimate_cost(const GeneralModel& model, const PathBundle& bundle, double tau);

// Paired difference of two policies' costs from (t0,x0) with the discount
// index tau, sharing Brownian increments path by path. Streams in chunks, so
// arbitrarily many paths never materialize. per_path_hook, when set, receives
// (path index, increment sum W(t_branch)-W(t0), costA, costB).
struct PairedDiff {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
};

PairedDiff estimate_cost_difference_paired(
    const GeneralModel& model, const Policy& policy_a, const Policy& policy_b, double t0,
    double x0, double t_branch, double tau, std::size_t n_paths, double dt, std::uint64_t seed,
    const SimOptions& opts = {},
    const std::function<void(std::size_t, double, double, double)>& per_path_hook = nullptr);

// ---------------------------------------------------------------------------
// Spike-deviation equilibrium test
// ---------------------------------------------------------------------------

struct SpikeCell {
    double eps;
    double deviation;
    double delta;      // J_equilibrium - J_deviated (positive = improvement found)
    double std_error;  // of the paired estimate
};

struct SpikeReport {
    std::vector<SpikeCell> cells;
    std::vector<double> eps_list;
    std::vector<double> delta_max;  // per eps
    double fitted_c = 0.0;          // least squares of delta_max vs eps through 0
    bool pass = false;              // delta <= c eps + 3 SE everywhere
    bool shrinking = false;         // delta_max decreases as eps halves
};

SpikeReport spike_deviation_test(const GeneralModel& model, const Policy& equilibrium, double x0,
                                 double t, const std::vector<double>& eps_list,
                                 const std::vector<double>& deviations, std::size_t n_paths,
                                 double dt, std::uint64_t seed, const SimOptions& opts = {});

// ---------------------------------------------------------------------------
// Moment-bound check
// ---------------------------------------------------------------------------

struct MomentReport {
    bool pass = false;
    double K = 0.0;          // fitted at the coarse horizon, slack included
    double slack = 1.25;     // documented fitting slack
    double worst_ratio = 0.0;
    std::vector<double> ratios;  // per checked step
};

MomentReport moment_bound_check(const PathBundle& bundle, int q, double fit_fraction = 0.5,
                                double slack = 1.25);

}  // namespace tieq::mc
