// Euler-Maruyama engine with counter-based randomness and common-random-
// number pairing. The log-Euler scheme steps exp((b/x - (s/x)^2/2) dt +
// (s/x) dW), exact per step for dynamics linear in the state, and keeps
// simulated wealth positive.

#include "tieq/mc.hpp"

#include "tieq/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

namespace tieq::mc {

namespace {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                             std::uint64_t sub) {
    std::uint64_t h = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
    h = splitmix64(h ^ path);
    h = splitmix64(h ^ (step * 0x100000001b3ULL));
    h = splitmix64(h ^ (sub * 0xc2b2ae3d27d4eb4fULL));
    return h;
}

inline double to_unit(std::uint64_t h) {
    // 53-bit mantissa in (0,1)
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double CounterRng::uniform(std::uint64_t path, std::uint64_t step, std::uint64_t sub) const {
    return to_unit(mix_key(seed_, path, step, sub));
}

double CounterRng::normal(std::uint64_t path, std::uint64_t step, std::uint64_t sub) const {
    const double u1 = to_unit(mix_key(seed_, path, step, 2 * sub));
    const double u2 = to_unit(mix_key(seed_, path, step, 2 * sub + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

Policy Policy::constant(std::vector<double> u) {
    Policy p;
    p.m_ = static_cast<int>(u.size());
    p.fn_ = [u = std::move(u)](double, double, std::span<double> out) {
        std::copy(u.begin(), u.end(), out.begin());
    };
    return p;
}

Policy Policy::generic(int m, Fn fn) {
    Policy p;
    p.m_ = m;
    p.fn_ = std::move(fn);
    return p;
}

Policy Policy::linear_gain(int m, std::function<void(double, std::span<double>)> gains) {
    Policy p;
    p.m_ = m;
    p.fn_ = [g = std::move(gains)](double t, double x, std::span<double> out) {
        g(t, out);
        for (double& v : out) v *= x;
    };
    return p;
}

Policy Policy::from_grid(const PolicyGrid& grid) {
    Policy p;
    p.m_ = 1;
    p.fn_ = [grid](double t, double x, std::span<double> out) { out[0] = grid.eval(t, x); };
    return p;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace {

// advance one path step; returns the new state
inline double advance(const GeneralModel& model, Scheme scheme, double t, double x,
                      std::span<const double> u, double dt, double dw) {
    const double b = model.drift(t, x, u);
    const double s = model.diffusion_control_free ? model.sigma(t, x) : model.sigma_u(t, x, u);
    if (scheme == Scheme::Euler) return x + b * dt + s * dw;
    // log-Euler: per-unit rates; requires x > 0
    const double br = b / x;
    const double sr = s / x;
    return x * std::exp((br - 0.5 * sr * sr) * dt + sr * dw);
}

}  // namespace

PathBundle simulate_paths(const GeneralModel& model, const Policy& policy, double t0, double x0,
                          std::size_t n_paths, double dt, std::uint64_t seed,
                          const SimOptions& opts) {
    if (n_paths < 1) throw std::domain_error("need at least one path");
    if (!(dt > 0.0)) throw std::domain_error("dt must be positive");
    const double span = model.T - t0;
    const auto n_steps = static_cast<std::size_t>(std::llround(span / dt));
    if (n_steps < 1 || std::abs(n_steps * dt - span) > 1e-9 * std::max(1.0, span))
        throw std::domain_error("dt must divide T - t0");

    PathBundle bundle;
    bundle.t0 = t0;
    bundle.x0 = x0;
    bundle.dt = dt;
    bundle.n_paths = n_paths;
    bundle.n_steps = n_steps;
    bundle.control_dim = policy.dim();
    bundle.seed = seed;
    bundle.scheme = opts.scheme;
    bundle.states.assign(n_paths * (n_steps + 1), 0.0);
    bundle.controls.assign(n_paths * n_steps * policy.dim(), 0.0);

    const CounterRng rng(seed);
    const double sqrt_dt = std::sqrt(dt);
    const int m = policy.dim();

    std::atomic<std::size_t> blown_path{static_cast<std::size_t>(-1)};
    std::atomic<std::size_t> blown_step{0};

    parallel_for(
        n_paths,
        [&](std::size_t lo, std::size_t hi) {
            std::vector<double> u(static_cast<std::size_t>(m));
            for (std::size_t path = lo; path < hi; ++path) {
                double x = x0;
                bundle.states[path * (n_steps + 1)] = x;
                for (std::size_t step = 0; step < n_steps; ++step) {
                    const double t = t0 + dt * static_cast<double>(step);
                    policy.eval(t, x, u);
                    std::copy(u.begin(), u.end(),
                              bundle.controls.begin() +
                                  static_cast<std::ptrdiff_t>((path * n_steps + step) * m));
                    const double dw = sqrt_dt * rng.normal(path, step);
                    x = advance(model, opts.scheme, t, x, u, dt, dw);
                    if (std::abs(x) > opts.blowup_bound) {
                        blown_step.store(step);
                        blown_path.store(path);
                        return;
                    }
                    bundle.states[path * (n_steps + 1) + step + 1] = x;
                }
            }
        },
        opts.n_threads);

    if (blown_path.load() != static_cast<std::size_t>(-1))
        throw Blowup(blown_path.load(), blown_step.load());
    return bundle;
}

CostEstimate estimate_cost(const GeneralModel& model, const PathBundle& bundle, double tau) {
    if (tau > bundle.t0 + 1e-12) throw std::domain_error("discount index tau must be <= t0");
    std::vector<double> costs(bundle.n_paths);
    for (std::size_t path = 0; path < bundle.n_paths; ++path) {
        double acc = 0.0;
        double prev = model.running(tau, bundle.time(0), bundle.state(path, 0),
                                    bundle.control(path, 0));
        for (std::size_t step = 1; step <= bundle.n_steps; ++step) {
            const std::size_t ustep = std::min(step, bundle.n_steps - 1);
            const double cur = model.running(tau, bundle.time(step), bundle.state(path, step),
                                             bundle.control(path, ustep));
            acc += 0.5 * bundle.dt * (prev + cur);
            prev = cur;
        }
        acc += model.terminal(tau, bundle.state(path, bundle.n_steps));
        costs[path] = acc;
    }
    const MeanStderr ms = mean_stderr(costs);
    return {ms.mean, ms.std_error, bundle.n_paths, tau};
}

// ---------------------------------------------------------------------------
// Paired cost differences (common random numbers), streaming
// ---------------------------------------------------------------------------

namespace {

struct PathCost {
    double cost = 0.0;
    double x_branch = 0.0;
};

// run one path under `policy`, accumulating the running cost with index tau
// from t_branch onward; shared increments come from the rng keyed by path
PathCost run_path_cost(const GeneralModel& model, const Policy& policy, double t0, double x0,
                       double t_branch, double tau, std::size_t n_steps, double dt,
                       const CounterRng& rng, std::size_t path, Scheme scheme,
                       double blowup_bound) {
    const double sqrt_dt = std::sqrt(dt);
    const int m = policy.dim();
    std::vector<double> u(static_cast<std::size_t>(m));
    double x = x0;
    double acc = 0.0;
    double prev_g = 0.0;
    bool costing = t0 >= t_branch - 1e-12;
    PathCost out;
    if (costing) {
        policy.eval(t0, x, u);
        prev_g = model.running(tau, t0, x, u);
        out.x_branch = x;
    }
    for (std::size_t step = 0; step < n_steps; ++step) {
        const double t = t0 + dt * static_cast<double>(step);
        policy.eval(t, x, u);
        const double dw = sqrt_dt * rng.normal(path, step);
        x = advance(model, scheme, t, x, u, dt, dw);
        if (std::abs(x) > blowup_bound) throw Blowup(path, step);
        const double t_next = t + dt;
        if (!costing && t_next >= t_branch - 1e-12) {
            costing = true;
            out.x_branch = x;
            policy.eval(t_next, x, u);
            prev_g = model.running(tau, t_next, x, u);
            continue;
        }
        if (costing) {
            policy.eval(t_next, x, u);
            const double g = model.running(tau, t_next, x, u);
            acc += 0.5 * dt * (prev_g + g);
            prev_g = g;
        }
    }
    acc += model.terminal(tau, x);
    out.cost = acc;
    return out;
}

}  // namespace

PairedDiff estimate_cost_difference_paired(
    const GeneralModel& model, const Policy& policy_a, const Policy& policy_b, double t0,
    double x0, double t_branch, double tau, std::size_t n_paths, double dt, std::uint64_t seed,
    const SimOptions& opts,
    const std::function<void(std::size_t, double, double, double)>& per_path_hook) {
    const double span = model.T - t0;
    const auto n_steps = static_cast<std::size_t>(std::llround(span / dt));
    if (n_steps < 1 || std::abs(n_steps * dt - span) > 1e-9 * std::max(1.0, span))
        throw std::domain_error("dt must divide T - t0");
    const auto branch_steps = static_cast<std::size_t>(std::llround((t_branch - t0) / dt));
    if (std::abs(t0 + branch_steps * dt - t_branch) > 1e-9)
        throw std::domain_error("dt must divide t_branch - t0");

    const CounterRng rng(seed);
    std::vector<double> diffs(n_paths);
    std::vector<double> wsum(per_path_hook ? n_paths : 0);
    std::vector<double> cost_a(per_path_hook ? n_paths : 0);
    std::vector<double> cost_b(per_path_hook ? n_paths : 0);

    parallel_for(
        n_paths,
        [&](std::size_t lo, std::size_t hi) {
            for (std::size_t path = lo; path < hi; ++path) {
                const PathCost a = run_path_cost(model, policy_a, t0, x0, t_branch, tau, n_steps,
                                                 dt, rng, path, opts.scheme, opts.blowup_bound);
                const PathCost b = run_path_cost(model, policy_b, t0, x0, t_branch, tau, n_steps,
                                                 dt, rng, path, opts.scheme, opts.blowup_bound);
                diffs[path] = a.cost - b.cost;
                if (per_path_hook) {
                    double w = 0.0;
                    const double sqrt_dt = std::sqrt(dt);
                    for (std::size_t step = 0; step < branch_steps; ++step)
                        w += sqrt_dt * rng.normal(path, step);
                    wsum[path] = w;
                    cost_a[path] = a.cost;
                    cost_b[path] = b.cost;
                }
            }
        },
        opts.n_threads);

    if (per_path_hook)
        for (std::size_t path = 0; path < n_paths; ++path)
            per_path_hook(path, wsum[path], cost_a[path], cost_b[path]);

    const MeanStderr ms = mean_stderr(diffs);
    return {ms.mean, ms.std_error, n_paths};
}

// ---------------------------------------------------------------------------
// Spike deviations
// ---------------------------------------------------------------------------

SpikeReport spike_deviation_test(const GeneralModel& model, const Policy& equilibrium, double x0,
                                 double t, const std::vector<double>& eps_list,
                                 const std::vector<double>& deviations, std::size_t n_paths,
                                 double dt, std::uint64_t seed, const SimOptions& opts) {
    SpikeReport report;
    report.eps_list = eps_list;

    const double span = model.T;
    const auto n_steps = static_cast<std::size_t>(std::llround(span / dt));
    if (n_steps < 1 || std::abs(n_steps * dt - span) > 1e-9 * std::max(1.0, span))
        throw std::domain_error("dt must divide T");
    const CounterRng rng(seed);

    for (double eps : eps_list) {
        if (t + eps > model.T + 1e-12) throw std::domain_error("need t + eps <= T");
        std::vector<Policy> deviated;
        deviated.reserve(deviations.size());
        for (double dev : deviations)
            deviated.push_back(Policy::generic(
                equilibrium.dim(), [&equilibrium, t, dev, eps](double s, double x,
                                                               std::span<double> u) {
                    if (s >= t - 1e-12 && s < t + eps - 1e-12) {
                        u[0] = dev;
                        for (std::size_t i = 1; i < u.size(); ++i) u[i] = 0.0;
                    } else {
                        equilibrium.eval(s, x, u);
                    }
                }));

        // paths run from time 0 under the equilibrium and branch at t; the
        // equilibrium leg is shared by every deviation on the same path
        std::vector<std::vector<double>> diffs(deviations.size(),
                                               std::vector<double>(n_paths));
        parallel_for(
            n_paths,
            [&](std::size_t lo, std::size_t hi) {
                for (std::size_t path = lo; path < hi; ++path) {
                    const PathCost base =
                        run_path_cost(model, equilibrium, 0.0, x0, t, t, n_steps, dt, rng, path,
                                      opts.scheme, opts.blowup_bound);
                    for (std::size_t d = 0; d < deviated.size(); ++d) {
                        const PathCost devc =
                            run_path_cost(model, deviated[d], 0.0, x0, t, t, n_steps, dt, rng,
                                          path, opts.scheme, opts.blowup_bound);
                        diffs[d][path] = base.cost - devc.cost;
                    }
                }
            },
            opts.n_threads);

        double dmax = -std::numeric_limits<double>::infinity();
        for (std::size_t d = 0; d < deviations.size(); ++d) {
            const MeanStderr ms = mean_stderr(diffs[d]);
            report.cells.push_back({eps, deviations[d], ms.mean, ms.std_error});
            dmax = std::max(dmax, ms.mean);
        }
        report.delta_max.push_back(dmax);
    }

    // least squares c through the origin on the positive parts
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        num += std::max(report.delta_max[i], 0.0) * eps_list[i];
        den += eps_list[i] * eps_list[i];
    }
    report.fitted_c = den > 0.0 ? num / den : 0.0;

    report.pass = true;
    for (const SpikeCell& cell : report.cells)
        if (cell.delta > report.fitted_c * cell.eps + 3.0 * cell.std_error) report.pass = false;

    report.shrinking = true;
    for (std::size_t i = 1; i < report.delta_max.size(); ++i)
        if (std::max(report.delta_max[i], 0.0) >
            std::max(report.delta_max[i - 1], 0.0) + 1e-12)
            report.shrinking = false;
    return report;
}

// ---------------------------------------------------------------------------
// Moment bound
// ---------------------------------------------------------------------------

MomentReport moment_bound_check(const PathBundle& bundle, int q, double fit_fraction,
                                double slack) {
    if (q != 2 && q != 4) throw std::domain_error("q must be 2 or 4");
    MomentReport report;
    report.slack = slack;

    const std::size_t n_check = bundle.n_steps + 1;
    std::vector<double> moment(n_check, 0.0);
    std::vector<double> ctrl_int(n_check, 0.0);  // running mean of int |u|^q

    std::vector<double> buf(bundle.n_paths);
    for (std::size_t step = 0; step < n_check; ++step) {
        for (std::size_t path = 0; path < bundle.n_paths; ++path)
            buf[path] = std::pow(std::abs(bundle.state(path, step)), q);
        moment[step] = pairwise_sum(buf) / static_cast<double>(bundle.n_paths);
    }
    for (std::size_t step = 1; step < n_check; ++step) {
        for (std::size_t path = 0; path < bundle.n_paths; ++path) {
            double unorm = 0.0;
            const auto u = bundle.control(path, step - 1);
            for (double ui : u) unorm += ui * ui;
            buf[path] = std::pow(unorm, 0.5 * q);
        }
        ctrl_int[step] = ctrl_int[step - 1] +
                         bundle.dt * pairwise_sum(buf) / static_cast<double>(bundle.n_paths);
    }

    const double xq = std::pow(std::abs(bundle.x0), q);
    report.ratios.resize(n_check);
    for (std::size_t step = 0; step < n_check; ++step)
        report.ratios[step] = moment[step] / (1.0 + xq + ctrl_int[step]);

    const auto fit_end = static_cast<std::size_t>(fit_fraction * static_cast<double>(n_check));
    double k_fit = 0.0;
    for (std::size_t step = 0; step < std::max<std::size_t>(fit_end, 1); ++step)
        k_fit = std::max(k_fit, report.ratios[step]);
    report.K = k_fit * slack;

    report.pass = true;
    for (std::size_t step = fit_end; step < n_check; ++step) {
        report.worst_ratio = std::max(report.worst_ratio, report.ratios[step]);
        if (report.ratios[step] > report.K) report.pass = false;
    }
    return report;
}

}  // namespace tieq::mc
