#include "tieq/mc.hpp"

#include "tieq/common.hpp"
#include "tieq/hjb.hpp"
#include "tieq/lq.hpp"
#include "tieq/merton.hpp"
#include "tieq/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace tieq;
using namespace tieq::mc;

namespace {

GeneralModel example21_mc_model(double sigma, Weight1 g, double T = 1.0) {
    return make_lq1d(T, sigma, 0.0, [](double, double) { return 1.0; },
                     [](double, double) { return 0.0; }, std::move(g));
}

Policy precommit_policy(const oracle::LQExampleParams& p, double t0) {
    return Policy::linear_gain(1, [p, t0](double s, std::span<double> g) {
        g[0] = -oracle::lq_riccati_closed_form(p, t0, s);
    });
}

}  // namespace

TEST_CASE("constant paths when nothing moves") {
    CustomModelSpec spec;
    spec.T = 1.0;
    spec.drift = "0";
    spec.sigma = "0";
    spec.running = "0";
    spec.terminal = "1";
    spec.control_set = ControlSet::real_line(1);
    GeneralModel model = make_custom(spec);
    const auto bundle = simulate_paths(model, Policy::constant({0.0}), 0.0, 1.7, 32, 0.05, 9);
    for (std::size_t i = 0; i < bundle.n_paths; ++i)
        for (std::size_t s = 0; s <= bundle.n_steps; ++s)
            CHECK(bundle.state(i, s) == 1.7);

    // g == 0, h == 1 gives exactly (1, 0)
    const auto cost = estimate_cost(model, bundle, 0.0);
    CHECK(cost.mean == 1.0);
    CHECK(cost.std_error == 0.0);
}

TEST_CASE("determinism: identical seeds and thread counts do not matter") {
    const oracle::LQExampleParams p{1.0, 1.0, [](double t) { return 1.0 + t; }};
    GeneralModel model = example21_mc_model(1.0, p.g);
    const Policy policy = precommit_policy(p, 0.0);
    SimOptions one;
    one.scheme = Scheme::LogEuler;
    one.n_threads = 1;
    SimOptions four = one;
    four.n_threads = 4;
    const auto a = simulate_paths(model, policy, 0.0, 1.0, 500, 1e-2, 77, one);
    const auto b = simulate_paths(model, policy, 0.0, 1.0, 500, 1e-2, 77, four);
    const auto c = simulate_paths(model, policy, 0.0, 1.0, 500, 1e-2, 78, one);
    CHECK(a.states == b.states);      // bit-identical across thread counts
    CHECK(a.controls == b.controls);
    CHECK(a.states != c.states);      // different seed, different paths
}

TEST_CASE("terminal mean matches the closed-form moment") {
    const oracle::LQExampleParams p{1.0, 1.0, [](double t) { return 1.0 + t; }};
    GeneralModel model = example21_mc_model(1.0, p.g);
    SimOptions opts;
    opts.scheme = Scheme::LogEuler;
    const auto bundle = simulate_paths(model, precommit_policy(p, 0.0), 0.0, 1.0, 20000, 1e-3,
                                       42, opts);
    std::vector<double> xT(bundle.n_paths);
    for (std::size_t i = 0; i < bundle.n_paths; ++i) xT[i] = bundle.state(i, bundle.n_steps);
    const MeanStderr ms = mean_stderr(xT);
    // E X(T) = ratio(T) x0 since E e^{sigma W - sigma^2 s / 2} = 1
    const double s2 = 1.0, gt = p.g(0.0);
    const double exact = s2 / (s2 + gt * (std::exp(s2) - 1.0));
    CHECK(std::abs(ms.mean - exact) <= 3.0 * ms.std_error);

    // pre-commitment cost matches P(0,0) x^2
    const auto cost = estimate_cost(model, bundle, 0.0);
    CHECK(std::abs(cost.mean - oracle::lq_riccati_closed_form(p, 0.0, 0.0)) <=
          3.0 * cost.std_error);
}

TEST_CASE("log-Euler keeps multiplicative paths positive") {
    const oracle::LQExampleParams p{1.0, 1.0, [](double t) { return 1.0 + t; }};
    GeneralModel model = example21_mc_model(1.0, p.g);
    SimOptions opts;
    opts.scheme = Scheme::LogEuler;
    const auto bundle =
        simulate_paths(model, precommit_policy(p, 0.0), 0.0, 1.0, 2000, 1e-2, 5, opts);
    for (double x : bundle.states) CHECK(x > 0.0);
}

TEST_CASE("merton wealth under the equilibrium feedback stays positive") {
    // wealth SDE with the control pair (amount in stock, consumption rate);
    // the diffusion carries the control, so only the simulation path takes it
    const oracle::MertonParams p = oracle::hyperbolic_merton(0.05, 0.10, 0.2, 0.5, 1.0, 1.0);
    GeneralModel model;
    model.name = "merton_wealth";
    model.T = p.T;
    model.control_set = ControlSet::box({-1e9, 0.0}, {1e9, 1e9});
    model.diffusion_control_free = false;
    model.cost_sign = GeneralModel::CostSign::DeclaredBounded;
    model.drift = [p](double, double x, std::span<const double> u) {
        return p.r * x + (p.mu - p.r) * u[0] - u[1];
    };
    model.sigma_u = [p](double, double, std::span<const double> u) { return p.sigma * u[0]; };
    model.running = [p](double tau, double t, double, std::span<const double> u) {
        return -p.nu(tau, t) * std::pow(u[1], p.beta);  // flipped payoff
    };
    model.terminal = [p](double tau, double x) { return -p.rho(tau) * std::pow(x, p.beta); };

    const auto eq = merton::solve_merton_equilibrium(p, TimeGrid::uniform(p.T, 200));
    const double kappa = (p.mu - p.r) / (p.sigma * p.sigma * (1.0 - p.beta));
    Policy feedback = Policy::linear_gain(2, [&eq, kappa](double t, std::span<double> g) {
        g[0] = kappa;
        g[1] = eq.consumption_coeff(t);
    });
    SimOptions opts;
    opts.scheme = Scheme::LogEuler;
    const auto bundle = simulate_paths(model, feedback, 0.0, 1.0, 2000, 1e-3, 13, opts);
    for (double x : bundle.states) CHECK(x > 0.0);
    for (std::size_t i = 0; i < bundle.n_paths; ++i)
        for (std::size_t s = 0; s < bundle.n_steps; ++s)
            CHECK(bundle.control(i, s)[1] >= 0.0);  // consumption stays admissible

    // grid solvers refuse the controlled diffusion outright
    hjb::GridSpec grids;
    grids.space = SpatialGrid1D(0.1, 3.0, 32);
    grids.time = TimeGrid::uniform(p.T, 16);
    grids.boundary = hjb::BoundaryRule::Linearity;
    CHECK_THROWS_AS(hjb::classical_hjb(model, 0.0, grids), NotControlFreeDiffusion);
}

TEST_CASE("paired gap estimate agrees with the closed-form gap") {
    const oracle::LQExampleParams p{1.0, 1.0, [](double t) { return 1.0 + t; }};
    GeneralModel model = example21_mc_model(1.0, p.g);
    const double tau = 0.5, x0 = 1.0;
    const Policy restricted = precommit_policy(p, 0.0);
    const Policy reopt = Policy::linear_gain(1, [p, tau](double s, std::span<double> g) {
        g[0] = -oracle::lq_riccati_closed_form(p, s < tau ? 0.0 : tau, s);
    });
    SimOptions opts;
    opts.scheme = Scheme::LogEuler;
    std::vector<double> paired(8000);
    const PairedDiff diff = estimate_cost_difference_paired(
        model, restricted, reopt, 0.0, x0, tau, tau, paired.size(), 2e-3, 11, opts,
        [&](std::size_t path, double w, double ca, double cb) {
            paired[path] = (ca - cb) - oracle::lq_inconsistency_gap(p, 0.0, tau, x0, w);
        });
    CHECK(diff.mean > 0.0);  // the restriction really is suboptimal at tau
    const MeanStderr ms = mean_stderr(paired);
    CHECK(std::abs(ms.mean) <= 3.0 * ms.std_error);
}

TEST_CASE("common random numbers beat independent seeds") {
    const oracle::LQExampleParams p{1.0, 1.0, [](double t) { return 1.0 + t; }};
    GeneralModel model = example21_mc_model(1.0, p.g);
    const double tau = 0.5;
    const Policy a = precommit_policy(p, 0.0);
    const Policy b = Policy::linear_gain(1, [p, tau](double s, std::span<double> g) {
        g[0] = -oracle::lq_riccati_closed_form(p, s < tau ? 0.0 : tau, s);
    });
    SimOptions opts;
    opts.scheme = Scheme::LogEuler;

    std::vector<double> se_paired, se_indep;
    for (int trial = 0; trial < 100; ++trial) {
        const std::uint64_t seed = 1000 + trial;
        std::vector<double> cost_a(400), cost_b(400);
        const PairedDiff d = estimate_cost_difference_paired(
            model, a, b, 0.0, 1.0, tau, tau, 400, 1e-2, seed, opts,
            [&](std::size_t path, double, double ca, double) { cost_a[path] = ca; });
        se_paired.push_back(d.std_error);
        // unpaired estimator: the second leg drawn under an independent seed
        estimate_cost_difference_paired(
            model, a, b, 0.0, 1.0, tau, tau, 400, 1e-2, seed + 50000, opts,
            [&](std::size_t path, double, double, double cb) { cost_b[path] = cb; });
        const MeanStderr sa = mean_stderr(cost_a);
        const MeanStderr sb = mean_stderr(cost_b);
        se_indep.push_back(std::sqrt(sa.std_error * sa.std_error +
                                     sb.std_error * sb.std_error));
    }
    std::sort(se_paired.begin(), se_paired.end());
    std::sort(se_indep.begin(), se_indep.end());
    CHECK(se_paired[50] < se_indep[50]);
}

TEST_CASE("spike deviation by the equilibrium itself is a no-op") {
    const oracle::LQExampleParams p{0.5, 1.0, [](double t) { return 1.0 + t; }};
    GeneralModel model = example21_mc_model(0.5, p.g);
    const lq::LQModel lqm = lq::scalar_lq(
        1.0, 0.0, 1.0, 0.5, 0.0, [](double, double) { return 0.0; },
        [](double, double) { return 1.0; }, p.g);
    const auto rv = lq::solve_riccati_volterra(lqm, TimeGrid::uniform(1.0, 64));

    mc::Policy eqp = Policy::linear_gain(1, [&rv](double s, std::span<double> g) {
        g[0] = -rv.gamma_at(s)(0, 0);
    });
    SimOptions opts;
    opts.scheme = Scheme::LogEuler;

    // pairing makes the zero deviation exactly zero
    const PairedDiff same = estimate_cost_difference_paired(model, eqp, eqp, 0.0, 1.0, 0.25,
                                                            0.25, 256, 5e-3, 3, opts);
    CHECK(same.mean == 0.0);
    CHECK(same.std_error == 0.0);

    // a wildly different spike strictly hurts
    const auto rep =
        spike_deviation_test(model, eqp, 1.0, 0.25, {0.1}, {3.0}, 4000, 5e-3, 3, opts);
    REQUIRE(rep.cells.size() == 1);
    CHECK(rep.cells[0].delta < 0.0);
    CHECK(rep.pass);
}

TEST_CASE("moment bound check") {
    // frozen dynamics: ratios constant, K = slack
    CustomModelSpec frozen;
    frozen.T = 1.0;
    frozen.drift = "0";
    frozen.sigma = "0";
    frozen.running = "0";
    frozen.terminal = "0";
    frozen.control_set = ControlSet::real_line(1);
    GeneralModel fmodel = make_custom(frozen);
    const auto fb = simulate_paths(fmodel, Policy::constant({0.0}), 0.0, 1.0, 64, 0.05, 2);
    const auto frep = moment_bound_check(fb, 2);
    CHECK(frep.pass);

    // Example 2.1 closed loop with q = 2: fit at half horizon, hold to T
    const oracle::LQExampleParams p{1.0, 1.0, [](double t) { return 1.0 + t; }};
    GeneralModel model = example21_mc_model(1.0, p.g);
    SimOptions opts;
    opts.scheme = Scheme::LogEuler;
    const auto bundle =
        simulate_paths(model, precommit_policy(p, 0.0), 0.0, 1.0, 4000, 2e-3, 21, opts);
    const auto rep = moment_bound_check(bundle, 2);
    CHECK(rep.pass);

    // blow-up injection b = x^3 violates the growth direction and is caught
    CustomModelSpec cubic;
    cubic.T = 0.4;
    cubic.drift = "x^3";
    cubic.sigma = "0.05";
    cubic.running = "0";
    cubic.terminal = "0";
    cubic.control_set = ControlSet::real_line(1);
    GeneralModel cmodel = make_custom(cubic);
    const auto cb = simulate_paths(cmodel, Policy::constant({0.0}), 0.0, 1.0, 2000, 1e-3, 31);
    const auto crep = moment_bound_check(cb, 2);
    CHECK_FALSE(crep.pass);
    CHECK(moment_bound_check(cb, 4).pass == false);
    CHECK_THROWS_AS(moment_bound_check(cb, 3), std::domain_error);
}

TEST_CASE("blow-up raises with path and step information") {
    CustomModelSpec cubic;
    cubic.T = 1.0;
    cubic.drift = "x^3";
    cubic.sigma = "0";
    cubic.running = "0";
    cubic.terminal = "0";
    cubic.control_set = ControlSet::real_line(1);
    GeneralModel cmodel = make_custom(cubic);
    CHECK_THROWS_AS(simulate_paths(cmodel, Policy::constant({0.0}), 0.0, 1.5, 4, 1e-3, 1),
                    Blowup);
}

TEST_CASE("dynamic-programming identity holds for the time-consistent case") {
    // tau-independent Example 2.1 weight: classical value satisfies the
    // discrete Bellman identity within Monte Carlo noise plus scheme error
    const double sigma = 0.5;
    const oracle::LQExampleParams p{sigma, 1.0, [](double) { return 1.5; }};
    GeneralModel model = example21_mc_model(sigma, p.g);
    hjb::GridSpec grids;
    grids.space = SpatialGrid1D(-3.0, 3.0, 150);
    grids.time = TimeGrid::uniform(1.0, 100);
    grids.boundary = hjb::BoundaryRule::Linearity;
    const auto cls = hjb::classical_hjb(model, 0.0, grids);

    const double x0 = 1.0, tau = 0.5;
    const std::size_t j_tau = grids.time.index_of(tau);

    // measured scheme error against the closed form, used as the error budget
    const auto coeff = [&](double t) { return oracle::lq_riccati_closed_form(p, 0.0, t); };
    double scheme_err = std::abs(cls.at(0, 75) - coeff(0.0) * grids.space[75] * grids.space[75]);
    for (std::size_t k = 25; k < 126; ++k) {
        const double x = grids.space[k];
        scheme_err = std::max(scheme_err, std::abs(cls.at(j_tau, k) - coeff(tau) * x * x));
    }

    Policy grid_policy = Policy::from_grid(cls.psi);
    SimOptions opts;
    opts.scheme = Scheme::Euler;
    const auto bundle = simulate_paths(model, grid_policy, 0.0, x0, 20000, 1e-3, 17, opts);
    std::vector<double> rhs(bundle.n_paths);
    const std::size_t step_tau = static_cast<std::size_t>(tau / bundle.dt);
    for (std::size_t path = 0; path < bundle.n_paths; ++path) {
        double acc = 0.0;
        double prev = 0.0;
        for (std::size_t s = 0; s <= step_tau; ++s) {
            const auto u = bundle.control(path, std::min(s, bundle.n_steps - 1));
            const double g = u[0] * u[0];
            if (s > 0) acc += 0.5 * bundle.dt * (prev + g);
            prev = g;
        }
        const double x_tau = bundle.state(path, step_tau);
        // interpolate the grid value at (tau, x_tau)
        const double pos = (std::clamp(x_tau, grids.space.x_min(), grids.space.x_max()) -
                            grids.space.x_min()) / grids.space.spacing();
        const std::size_t k = std::min(static_cast<std::size_t>(pos), grids.space.points() - 2);
        const double w = pos - static_cast<double>(k);
        rhs[path] = acc + (1.0 - w) * cls.at(j_tau, k) + w * cls.at(j_tau, k + 1);
    }
    const MeanStderr ms = mean_stderr(rhs);
    const double lhs = cls.at(0, grids.space.points() / 2 + 25);  // x = 1 node
    CHECK(grids.space[grids.space.points() / 2 + 25] == doctest::Approx(1.0));
    CHECK(std::abs(lhs - ms.mean) <= 3.0 * ms.std_error + 2.0 * scheme_err + 5e-3);
}
