// Finite-difference machinery for the two-time equilibrium system in one
// spatial dimension, control-free diffusion.
//
// One shared stepping kernel advances every backward solve: implicit Euler in
// time with diffusion and drift folded into a single tridiagonal solve; the
// policy, drift coefficient and source are taken from the previous (known)
// time level. The drift stencil is central by default (second order; exact
// on quadratics, which the LQ family needs), upwind or per-node hybrid when a
// monotone operator is required. Box edges impose zero second derivative;
// one-sided first differences coincide with central ones under that rule.
//
// On top of the kernel sit
//   * classical_hjb        - discount index frozen, policy from each level,
//   * solve_theta_slice    - linear propagation under a feedback grid,
//   * solve_partition_game - per-player HJB + slice propagation, with the
//                            game value read through the partition clock,
//   * solve_equilibrium_hjb- windowed Jacobi iteration on the diagonal.

#include "tieq/hjb.hpp"

#include "tieq/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tieq {

BivariateField::BivariateField(TimeGrid time, SpatialGrid1D space)
    : time_(std::move(time)), space_(space) {
    slices_.resize(time_.size());
    for (std::size_t i = 0; i < time_.size(); ++i)
        slices_[i].assign((time_.size() - i) * space_.points(), 0.0);
}

double PolicyGrid::eval(double t, double x) const {
    const auto ts = time_.nodes();
    const std::size_t j = bracket_index(ts, std::clamp(t, ts.front(), ts.back()));
    const double wt = std::clamp((t - ts[j]) / (ts[j + 1] - ts[j]), 0.0, 1.0);
    const double xc = std::clamp(x, space_.x_min(), space_.x_max());
    const double pos = (xc - space_.x_min()) / space_.spacing();
    std::size_t k = static_cast<std::size_t>(pos);
    k = std::min(k, space_.points() - 2);
    const double wx = std::clamp(pos - static_cast<double>(k), 0.0, 1.0);
    const double lo = (1.0 - wx) * at(j, k) + wx * at(j, k + 1);
    const double hi = (1.0 - wx) * at(j + 1, k) + wx * at(j + 1, k + 1);
    return (1.0 - wt) * lo + wt * hi;
}

namespace hjb {

namespace {

void require_grid_model(const GeneralModel& model, const GridSpec& grids) {
    if (!model.diffusion_control_free) throw NotControlFreeDiffusion();
    if (grids.boundary == BoundaryRule::Unset) throw BoundarySpecError();
    if (std::abs(grids.time.horizon() - model.T) > 1e-10 * std::max(1.0, model.T))
        throw std::domain_error("grid horizon does not match the model");
    model.check_cost_sign(grids.space.x_min(), grids.space.x_max());
}

// slope and curvature of a slab under the zero-curvature boundary rule
double slope_at(const double* v, std::size_t k, std::size_t m_last, double h) {
    if (k == 0) return (v[1] - v[0]) / h;
    if (k == m_last) return (v[m_last] - v[m_last - 1]) / h;
    return (v[k + 1] - v[k - 1]) / (2.0 * h);
}

double curv_at(const double* v, std::size_t k, std::size_t m_last, double h) {
    if (k == 0 || k == m_last) return 0.0;
    return (v[k + 1] - 2.0 * v[k] + v[k - 1]) / (h * h);
}

void thomas_solve(std::vector<double>& lower, std::vector<double>& diag,
                  std::vector<double>& upper, std::vector<double>& rhs,
                  std::vector<double>& out) {
    const std::size_t n = diag.size();
    for (std::size_t k = 1; k < n; ++k) {
        const double w = lower[k] / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    out[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) out[k] = (rhs[k] - upper[k] * out[k + 1]) / diag[k];
}

struct StepScratch {
    std::vector<double> lower, diag, upper, rhs, a, b, src, out;
    void resize(std::size_t n) {
        lower.resize(n);
        diag.resize(n);
        upper.resize(n);
        rhs.resize(n);
        a.resize(n);
        b.resize(n);
        src.resize(n);
        out.resize(n);
    }
};

// One backward step: in holds level j+1, out receives level j. Coefficient
// arrays a, b, src are evaluated at the known level by the caller.
void step_linear(const SpatialGrid1D& space, double dt, StepScratch& s, const double* in,
                 DriftStencil stencil, StepDiagnostics* diag_out) {
    const std::size_t m_last = space.points() - 1;
    const double h = space.spacing();

    for (std::size_t k = 0; k <= m_last; ++k) {
        const double alpha = s.a[k] * dt / (h * h);
        const double beta = s.b[k] * dt / h;
        if (diag_out)
            diag_out->max_drift_cfl = std::max(diag_out->max_drift_cfl, std::abs(beta));
        if (k == 0 || k == m_last) {
            // zero curvature: diffusion drops, inward one-sided drift
            if (k == 0) {
                s.lower[k] = 0.0;
                s.diag[k] = 1.0 + beta;
                s.upper[k] = -beta;
                if (diag_out && beta < 0.0)
                    diag_out->max_boundary_outflow =
                        std::max(diag_out->max_boundary_outflow, -beta);
            } else {
                s.lower[k] = beta;
                s.diag[k] = 1.0 - beta;
                s.upper[k] = 0.0;
                if (diag_out && beta > 0.0)
                    diag_out->max_boundary_outflow =
                        std::max(diag_out->max_boundary_outflow, beta);
            }
        } else {
            bool central = stencil != DriftStencil::Upwind;
            if (stencil == DriftStencil::Hybrid && std::abs(beta) > 2.0 * alpha) {
                central = false;
                if (diag_out) ++diag_out->upwind_fallbacks;
            }
            if (central) {
                s.lower[k] = -alpha + 0.5 * beta;
                s.diag[k] = 1.0 + 2.0 * alpha;
                s.upper[k] = -alpha - 0.5 * beta;
            } else if (s.b[k] >= 0.0) {
                s.lower[k] = -alpha;
                s.diag[k] = 1.0 + 2.0 * alpha + beta;
                s.upper[k] = -alpha - beta;
            } else {
                s.lower[k] = -alpha + beta;
                s.diag[k] = 1.0 + 2.0 * alpha - beta;
                s.upper[k] = -alpha;
            }
        }
        s.rhs[k] = in[k] + dt * s.src[k];
    }
    thomas_solve(s.lower, s.diag, s.upper, s.rhs, s.out);
}

double select_policy(const GeneralModel& model, double tau, double t, double x, double p,
                     double P) {
    return minimize_hamiltonian(model, tau, t, x, p, P).u_star[0];
}

// fill coefficient arrays at the known level (time t_known) for a policy slab
void eval_coefficients(const GeneralModel& model, double tau, double t_known,
                       const SpatialGrid1D& space, const double* policy, StepScratch& s) {
    const std::size_t n = space.points();
    for (std::size_t k = 0; k < n; ++k) {
        const double x = space[k];
        const double u[1] = {policy[k]};
        const std::span<const double> us(u, 1);
        const double sg = model.sigma(t_known, x);
        s.a[k] = 0.5 * sg * sg;
        s.b[k] = model.drift(t_known, x, us);
        s.src[k] = model.running(tau, t_known, x, us);
    }
}

void count_locus_crossings(const GeneralModel& model, double tau, double t,
                           const SpatialGrid1D& space, const std::vector<double>& p,
                           StepDiagnostics* diag) {
    if (!diag || !model.selector_discontinuous || !model.discontinuity_gap) return;
    double prev = model.discontinuity_gap(tau, t, space[0], p[0]);
    for (std::size_t k = 1; k < space.points(); ++k) {
        const double cur = model.discontinuity_gap(tau, t, space[k], p[k]);
        if (prev * cur < 0.0) ++diag->locus_crossings;
        prev = cur;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// classical HJB
// ---------------------------------------------------------------------------

namespace {

// Core backward HJB march over fine levels [j_lo, j_hi]; the terminal slab is
// the value at level j_hi. The minimizing policy is recomputed from each
// visited level and written into psi; the terminal level is recorded only
// when this span owns it (record_terminal), so that at shared partition
// nodes the right interval's policy wins, matching the right-continuity of
// the partition clock.
std::vector<double> hjb_span(const GeneralModel& model, double tau_frozen, const GridSpec& grids,
                             std::size_t j_hi, std::size_t j_lo,
                             const std::vector<double>& terminal, PolicyGrid& psi,
                             bool record_terminal, const SchemeOptions& opts,
                             StepDiagnostics* diag) {
    const SpatialGrid1D& space = grids.space;
    const TimeGrid& time = grids.time;
    const std::size_t n = space.points();
    const double h = space.spacing();

    std::vector<double> slabs((j_hi - j_lo + 1) * n);
    std::copy(terminal.begin(), terminal.end(), slabs.begin() + (j_hi - j_lo) * n);

    StepScratch s;
    s.resize(n);
    std::vector<double> policy(n), grad(n);

    auto compute_policy = [&](std::size_t j, const double* slab, bool record) {
        const double t = time[j];
        for (std::size_t k = 0; k < n; ++k) {
            const double p = slope_at(slab, k, n - 1, h);
            const double P = curv_at(slab, k, n - 1, h);
            policy[k] = select_policy(model, tau_frozen, t, space[k], p, P);
            grad[k] = p;
            if (record) psi.at(j, k) = policy[k];
        }
        count_locus_crossings(model, tau_frozen, t, space, grad, diag);
    };

    compute_policy(j_hi, slabs.data() + (j_hi - j_lo) * n, record_terminal);
    for (std::size_t j = j_hi; j-- > j_lo;) {
        const double* in = slabs.data() + (j + 1 - j_lo) * n;
        double* out = slabs.data() + (j - j_lo) * n;
        eval_coefficients(model, tau_frozen, time[j + 1], space, policy.data(), s);
        step_linear(space, time[j + 1] - time[j], s, in, opts.drift, diag);
        std::copy(s.out.begin(), s.out.end(), out);
        compute_policy(j, out, true);
    }
    return slabs;
}

}  // namespace

ClassicalSolution classical_hjb(const GeneralModel& model, double tau_frozen,
                                const GridSpec& grids, const SchemeOptions& opts) {
    require_grid_model(model, grids);
    const std::size_t n = grids.space.points();
    const std::size_t N = grids.time.steps();

    std::vector<double> terminal(n);
    for (std::size_t k = 0; k < n; ++k) terminal[k] = model.terminal(tau_frozen, grids.space[k]);

    ClassicalSolution sol;
    sol.grids = grids;
    sol.psi = PolicyGrid(grids.time, grids.space);
    sol.values =
        hjb_span(model, tau_frozen, grids, N, 0, terminal, sol.psi, true, opts, &sol.diag);
    return sol;
}

std::vector<double> solve_theta_slice(const GeneralModel& model, const PolicyGrid& psi,
                                      double tau, const GridSpec& grids,
                                      const std::vector<double>& terminal, std::size_t j_hi,
                                      std::size_t j_lo, const SchemeOptions& opts,
                                      StepDiagnostics* diag) {
    require_grid_model(model, grids);
    const SpatialGrid1D& space = grids.space;
    const TimeGrid& time = grids.time;
    const std::size_t n = space.points();

    std::vector<double> slabs((j_hi - j_lo + 1) * n);
    std::copy(terminal.begin(), terminal.end(), slabs.begin() + (j_hi - j_lo) * n);

    StepScratch s;
    s.resize(n);
    std::vector<double> policy(n);
    for (std::size_t j = j_hi; j-- > j_lo;) {
        const double* in = slabs.data() + (j + 1 - j_lo) * n;
        for (std::size_t k = 0; k < n; ++k) policy[k] = psi.at(j + 1, k);
        eval_coefficients(model, tau, time[j + 1], space, policy.data(), s);
        step_linear(space, time[j + 1] - time[j], s, in, opts.drift, diag);
        std::copy(s.out.begin(), s.out.end(), slabs.begin() + (j - j_lo) * n);
    }
    return slabs;
}

// ---------------------------------------------------------------------------
// partition game
// ---------------------------------------------------------------------------

double PartitionGameSolution::value(std::size_t j, std::size_t k) const {
    const std::size_t p = partition_interval(partition, grids.time[j]);
    return theta(p, j, k);
}

double PartitionGameSolution::value_left(std::size_t kp, std::size_t k) const {
    return theta(kp - 1, part_index[kp], k);
}

double PartitionGameSolution::value_right(std::size_t kp, std::size_t k) const {
    return theta(kp, part_index[kp], k);
}

PartitionGameSolution solve_partition_game(const GeneralModel& model, const TimeGrid& partition,
                                           const GridSpec& grids, const SchemeOptions& opts) {
    require_grid_model(model, grids);
    if (!grids.time.contains(partition))
        throw std::domain_error("partition nodes must lie on the time grid");
    const std::size_t n = grids.space.points();
    const std::size_t N = grids.time.steps();
    const std::size_t Np = partition.steps();

    PartitionGameSolution sol;
    sol.grids = grids;
    sol.partition = partition;
    sol.psi = PolicyGrid(grids.time, grids.space);
    sol.part_index.resize(Np + 1);
    for (std::size_t p = 0; p <= Np; ++p) sol.part_index[p] = grids.time.index_of(partition[p]);
    sol.slices.resize(Np);

    // row p terminal data h(pi_p, x)
    std::vector<std::vector<double>> row_slab(Np, std::vector<double>(n));
    for (std::size_t p = 0; p < Np; ++p)
        for (std::size_t k = 0; k < n; ++k)
            row_slab[p][k] = model.terminal(partition[p], grids.space[k]);

    // process intervals right to left; rows keep their most recent slab in
    // row_slab and append full segments into sol.slices (built back to front)
    std::vector<std::vector<std::vector<double>>> segments(Np);
    for (std::size_t kp = Np; kp-- > 0;) {
        const std::size_t j_hi = sol.part_index[kp + 1];
        const std::size_t j_lo = sol.part_index[kp];
        // own row: HJB with the discount index frozen at pi_kp
        std::vector<double> own = hjb_span(model, partition[kp], grids, j_hi, j_lo, row_slab[kp],
                                           sol.psi, kp + 1 == Np, opts, &sol.diag);
        row_slab[kp].assign(own.begin(), own.begin() + static_cast<std::ptrdiff_t>(n));
        segments[kp].push_back(std::move(own));
        // earlier rows propagate linearly under the recorded feedback
        for (std::size_t p = 0; p < kp; ++p) {
            std::vector<double> seg = solve_theta_slice(model, sol.psi, partition[p], grids,
                                                        row_slab[p], j_hi, j_lo, opts, &sol.diag);
            row_slab[p].assign(seg.begin(), seg.begin() + static_cast<std::ptrdiff_t>(n));
            segments[p].push_back(std::move(seg));
        }
    }

    // stitch segments (collected right-to-left) into contiguous slices;
    // adjacent segments share the slab at the partition node
    for (std::size_t p = 0; p < Np; ++p) {
        const std::size_t len = (N - sol.part_index[p] + 1) * n;
        sol.slices[p].assign(len, 0.0);
        std::size_t j_right = N;  // segments[p][0] is the rightmost interval
        for (std::size_t q = 0; q < segments[p].size(); ++q) {
            const std::vector<double>& seg = segments[p][q];
            const std::size_t levels = seg.size() / n;
            const std::size_t j_left = j_right - (levels - 1);
            for (std::size_t j = j_left; j <= j_right; ++j) {
                const double* src = seg.data() + (j - j_left) * n;
                double* dst = sol.slices[p].data() + (j - sol.part_index[p]) * n;
                std::copy(src, src + n, dst);
            }
            j_right = j_left;
        }
    }
    return sol;
}

// ---------------------------------------------------------------------------
// equilibrium HJB (windowed diagonal fixed point)
// ---------------------------------------------------------------------------

namespace {

struct DiagState {
    // diagonal estimate v(t_j, x_k) and the induced feedback
    std::vector<std::vector<double>> v;
    PolicyGrid psi;
};

void update_psi_level(const GeneralModel& model, const GridSpec& grids, DiagState& st,
                      std::size_t j, StepDiagnostics* diag) {
    const SpatialGrid1D& space = grids.space;
    const std::size_t n = space.points();
    const double h = space.spacing();
    const double t = grids.time[j];
    const double* slab = st.v[j].data();
    std::vector<double> grad(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double p = slope_at(slab, k, n - 1, h);
        const double P = curv_at(slab, k, n - 1, h);
        st.psi.at(j, k) = select_policy(model, t, t, space[k], p, P);
        grad[k] = p;
    }
    count_locus_crossings(model, t, t, space, grad, diag);
}

}  // namespace

EquilibriumSolution solve_equilibrium_hjb(const GeneralModel& model, const GridSpec& grids,
                                          const EquilibriumOptions& opts) {
    require_grid_model(model, grids);
    const SpatialGrid1D& space = grids.space;
    const TimeGrid& time = grids.time;
    const std::size_t n = space.points();
    const std::size_t N = time.steps();
    const double T = time.horizon();

    EquilibriumSolution sol;
    StepDiagnostics diag;

    DiagState st;
    st.psi = PolicyGrid(time, space);
    st.v.resize(N + 1, std::vector<double>(n));
    for (std::size_t j = 0; j <= N; ++j)
        for (std::size_t k = 0; k < n; ++k) st.v[j][k] = model.terminal(time[j], space[k]);
    for (std::size_t j = 0; j <= N; ++j) update_psi_level(model, grids, st, j, nullptr);

    std::vector<std::vector<double>> terminal(N + 1, std::vector<double>(n));
    for (std::size_t i = 0; i <= N; ++i)
        for (std::size_t k = 0; k < n; ++k) terminal[i][k] = model.terminal(time[i], space[k]);

    double window = opts.window > 0.0 ? opts.window : 0.25 * T;
    const double min_dt = [&] {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < N; ++j) m = std::min(m, time[j + 1] - time[j]);
        return m;
    }();

    std::size_t frozen_from = N + 1;  // levels >= frozen_from are converged
    int total_sweeps = 0;

    while (frozen_from > 0) {
        const std::size_t cache_level = frozen_from - 1;
        const double right_t = time[cache_level];
        std::size_t w_left = cache_level;
        while (w_left > 0 && right_t - time[w_left - 1] <= window + 1e-12) --w_left;
        if (w_left == cache_level && w_left > 0) w_left = cache_level - 1;

        // segment of each window slice above the cache level is frozen
        std::vector<std::vector<double>> cache(cache_level - w_left + 1);
        for (std::size_t i = w_left; i <= cache_level; ++i) {
            if (cache_level == N) {
                cache[i - w_left] = terminal[i];
            } else {
                std::vector<double> seg = solve_theta_slice(model, st.psi, time[i], grids,
                                                            terminal[i], N, cache_level,
                                                            opts.scheme, nullptr);
                cache[i - w_left].assign(seg.begin(), seg.begin() + static_cast<std::ptrdiff_t>(n));
            }
        }

        // flat initial guess from the frozen edge
        if (cache_level != N)
            for (std::size_t j = w_left; j < cache_level; ++j) st.v[j] = st.v[cache_level];
        for (std::size_t j = w_left; j <= cache_level; ++j)
            update_psi_level(model, grids, st, j, nullptr);

        double prev_defect = std::numeric_limits<double>::infinity();
        int bad_streak = 0;
        bool converged = false;
        for (int sweep = 0; sweep < opts.max_iter; ++sweep) {
            ++total_sweeps;
            std::vector<std::vector<double>> v_new(cache_level - w_left + 1);
            const auto run = [&](std::size_t lo, std::size_t hi) {
                for (std::size_t idx = lo; idx < hi; ++idx) {
                    const std::size_t i = w_left + idx;
                    if (i == cache_level) {
                        v_new[idx] = cache[idx];
                        continue;
                    }
                    std::vector<double> seg =
                        solve_theta_slice(model, st.psi, time[i], grids, cache[idx], cache_level,
                                          i, opts.scheme, nullptr);
                    v_new[idx].assign(seg.begin(),
                                      seg.begin() + static_cast<std::ptrdiff_t>(n));
                }
            };
            parallel_for(cache_level - w_left + 1, run, opts.scheme.n_threads);

            double defect = 0.0;
            for (std::size_t idx = 0; idx <= cache_level - w_left; ++idx)
                for (std::size_t k = 0; k < n; ++k)
                    defect = std::max(defect,
                                      std::abs(v_new[idx][k] - st.v[w_left + idx][k]));
            for (std::size_t idx = 0; idx <= cache_level - w_left; ++idx)
                st.v[w_left + idx] = std::move(v_new[idx]);
            for (std::size_t j = w_left; j <= cache_level; ++j)
                update_psi_level(model, grids, st, j, &diag);

            if (defect <= opts.tol) {
                sol.window_log.push_back(defect);
                converged = true;
                break;
            }
            bad_streak = defect > prev_defect ? bad_streak + 1 : 0;
            prev_defect = defect;
            if (bad_streak >= 3) break;
        }

        if (!converged) {
            window *= 0.5;
            if (window < min_dt)
                throw NoConvergence("equilibrium window shrank below the time step",
                                    total_sweeps, prev_defect);
            continue;  // retry the same window span with the smaller width
        }
        frozen_from = w_left;
    }

    // final assembly with the converged feedback
    sol.theta = BivariateField(time, space);
    for (std::size_t i = 0; i <= N; ++i) {
        std::vector<double> seg = (i == N)
            ? terminal[i]
            : solve_theta_slice(model, st.psi, time[i], grids, terminal[i], N, i, opts.scheme,
                                &diag);
        std::copy(seg.begin(), seg.end(), sol.theta.slab(i, i));
    }

    // rebuild the feedback from the assembled diagonal and measure the scheme
    // defect of the equilibrium equation with it
    for (std::size_t j = 0; j <= N; ++j) {
        st.v[j].assign(sol.theta.slab(j, j), sol.theta.slab(j, j) + n);
        update_psi_level(model, grids, st, j, nullptr);
    }
    sol.psi = st.psi;
    sol.iters = total_sweeps;

    double residual = 0.0;
    const double h = space.spacing();
    StepScratch s;
    s.resize(n);
    std::vector<double> policy(n);
    for (std::size_t i = 0; i <= N; ++i) {
        for (std::size_t j = i; j < N; ++j) {
            const double dt = time[j + 1] - time[j];
            for (std::size_t k = 0; k < n; ++k) policy[k] = sol.psi.at(j + 1, k);
            eval_coefficients(model, time[i], time[j + 1], space, policy.data(), s);
            const double* up = sol.theta.slab(i, j + 1);
            const double* lo = sol.theta.slab(i, j);
            for (std::size_t k = 1; k + 1 < n; ++k) {
                const double dtheta = (up[k] - lo[k]) / dt;
                const double diff = s.a[k] * curv_at(lo, k, n - 1, h);
                const double drift = s.b[k] * slope_at(lo, k, n - 1, h);
                residual = std::max(residual, std::abs(dtheta + diff + drift + s.src[k]));
            }
        }
    }
    sol.residual = residual;
    return sol;
}

// ---------------------------------------------------------------------------
// refinement study
// ---------------------------------------------------------------------------

ConvergenceTable refine_and_compare(const GeneralModel& model,
                                    const std::vector<std::size_t>& partition_sizes,
                                    const GridSpec& grids, const EquilibriumOptions& opts) {
    if (partition_sizes.size() < 3)
        throw std::domain_error("refinement study needs at least 3 partitions");
    const std::size_t N = grids.time.steps();
    EquilibriumSolution eq = solve_equilibrium_hjb(model, grids, opts);
    auto V = eq.V();

    ConvergenceTable table;
    std::vector<double> meshes, gaps;
    for (std::size_t np : partition_sizes) {
        if (np == 0 || N % np != 0)
            throw std::domain_error("partition size must divide the number of time steps");
        std::vector<double> nodes;
        for (std::size_t p = 0; p <= np; ++p) nodes.push_back(grids.time[p * (N / np)]);
        const TimeGrid partition{std::move(nodes)};
        PartitionGameSolution game = solve_partition_game(model, partition, grids, opts.scheme);
        double gap = 0.0;
        for (std::size_t j = 0; j <= N; ++j)
            for (std::size_t k = 0; k < grids.space.points(); ++k)
                gap = std::max(gap, std::abs(game.value(j, k) - V(j, k)));
        table.rows.push_back({np, partition.mesh(), gap});
        meshes.push_back(partition.mesh());
        gaps.push_back(gap);
    }
    table.fitted_order = fit_loglog_slope(meshes, gaps);
    return table;
}

}  // namespace hjb
}  // namespace tieq
