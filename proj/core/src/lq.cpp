// Riccati-Volterra solver for time-inconsistent LQ problems.
//
// Every row tau_i of the field P(tau_i, t) satisfies the same linear matrix
// ODE once the gain path Gamma(t) is known:
//
//   P_t + P Ah + Ah' P + A1h' P A1h + Q(tau_i,t) + Gamma' R(tau_i,t) Gamma = 0,
//   Ah = A - B Gamma,  A1h = A1 - B1 Gamma,  P(tau_i, T) = G(tau_i),
//
// with Gamma(t) = [R(t,t) + B1' P(t,t) B1]^{-1} [B' P(t,t) + B1' P(t,t) A1]
// closing the system through the diagonal. The marching mode steps all rows
// backward with RK4, predicting Gamma at the new node by extrapolation and
// correcting once from the freshly integrated diagonal. The fixed-point mode
// freezes a gain path, solves the rows linearly, and iterates (the
// contraction construction, kept as a validation route).
//
// The partition game reuses the same row ODEs with the gain read from the
// partition row ell(t) instead of the moving diagonal; that coupling is local
// in time, so the stacked system is integrated with exact RK4 stages.

#include "tieq/lq.hpp"

#include "tieq/common.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace tieq::lq {

namespace {

void check_square(const Mat& m, int n, const char* what) {
    if (m.rows() != n || m.cols() != n) throw std::domain_error(std::string(what) + ": bad shape");
}

Mat symmetrize(const Mat& p) { return 0.5 * (p + p.transpose()); }

struct GainContext {
    const LQModel* model;
    double cond_limit;
};

// Gamma = [R(r_tau, t) + B1' P B1]^{-1} [B' P + B1' P A1]
Mat gain(const GainContext& ctx, double r_tau, double t, const Mat& P) {
    const LQModel& md = *ctx.model;
    const Mat B = md.B(t), B1 = md.B1(t), A1 = md.A1(t);
    const Mat bracket = md.R(r_tau, t) + B1.transpose() * P * B1;
    const Mat rhs = B.transpose() * P + B1.transpose() * P * A1;
    Eigen::JacobiSVD<Mat> svd(bracket);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    // the bracket is singular relative to the data it has to divide
    const double scale = std::max(smax, rhs.norm());
    const double cond = smin > 0.0 ? scale / smin : std::numeric_limits<double>::infinity();
    if (!(smin > 0.0) || cond > ctx.cond_limit) throw SingularGain(t, cond);
    return bracket.ldlt().solve(rhs);
}

// right side of the backward row ODE at (tau_i, t) for a given gain value
Mat row_rhs(const LQModel& md, double tau_i, double t, const Mat& P, const Mat& Gamma) {
    const Mat Ah = md.A(t) - md.B(t) * Gamma;
    const Mat A1h = md.A1(t) - md.B1(t) * Gamma;
    const Mat Qh = md.Q(tau_i, t) + Gamma.transpose() * md.R(tau_i, t) * Gamma;
    return -(P * Ah + Ah.transpose() * P + A1h.transpose() * P * A1h + Qh);
}

// Lagrange interpolation of matrix samples at up to three abscissae.
Mat interp_mats(const std::vector<double>& ts, const std::vector<const Mat*>& ms, double s) {
    const std::size_t k = ts.size();
    if (k == 1) return *ms[0];
    if (k == 2) {
        const double w = (s - ts[0]) / (ts[1] - ts[0]);
        return (1.0 - w) * (*ms[0]) + w * (*ms[1]);
    }
    Mat out = Mat::Zero(ms[0]->rows(), ms[0]->cols());
    for (std::size_t i = 0; i < 3; ++i) {
        double w = 1.0;
        for (std::size_t j = 0; j < 3; ++j)
            if (j != i) w *= (s - ts[j]) / (ts[i] - ts[j]);
        out += w * (*ms[i]);
    }
    return out;
}

bool min_eig_below(const Mat& P, double floor) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(P));
    return es.eigenvalues().minCoeff() < floor;
}

}  // namespace

void LQModel::validate() const {
    if (n < 1 || m < 1) throw std::domain_error("LQ dimensions must be positive");
    if (!(T > 0.0)) throw std::domain_error("horizon must be positive");
    if (!A || !A1 || !B || !B1 || !Q || !R || !G)
        throw std::domain_error("LQ coefficient functions missing");
    check_square(A(0.0), n, "A");
    check_square(A1(0.0), n, "A1");
    if (B(0.0).rows() != n || B(0.0).cols() != m) throw std::domain_error("B: bad shape");
    if (B1(0.0).rows() != n || B1(0.0).cols() != m) throw std::domain_error("B1: bad shape");
    check_square(Q(0.0, 0.0), n, "Q");
    check_square(R(0.0, 0.0), m, "R");
    check_square(G(0.0), n, "G");
}

bool LQModel::deterministic_sampled() const {
    for (int i = 0; i <= 16; ++i) {
        const double t = T * i / 16.0;
        if (A1(t).norm() > 0.0 || B1(t).norm() > 0.0) return false;
    }
    return true;
}

LQModel scalar_lq(double T, double A, double B, double A1, double B1,
                  std::function<double(double, double)> Q, std::function<double(double, double)> R,
                  std::function<double(double)> G) {
    LQModel md;
    md.n = md.m = 1;
    md.T = T;
    md.A = [A](double) { return Mat::Constant(1, 1, A); };
    md.A1 = [A1](double) { return Mat::Constant(1, 1, A1); };
    md.B = [B](double) { return Mat::Constant(1, 1, B); };
    md.B1 = [B1](double) { return Mat::Constant(1, 1, B1); };
    md.Q = [Q](double tau, double t) { return Mat::Constant(1, 1, Q(tau, t)); };
    md.R = [R](double tau, double t) { return Mat::Constant(1, 1, R(tau, t)); };
    md.G = [G](double tau) { return Mat::Constant(1, 1, G(tau)); };
    return md;
}

Mat RiccatiVolterraSolution::gamma_at(double t) const {
    const auto ts = grid.nodes();
    if (t <= ts.front()) return Gamma.front();
    if (t >= ts.back()) return Gamma.back();
    const std::size_t k = bracket_index(ts, t);
    const double w = (t - ts[k]) / (ts[k + 1] - ts[k]);
    return (1.0 - w) * Gamma[k] + w * Gamma[k + 1];
}

// ---------------------------------------------------------------------------
// Marching solver
// ---------------------------------------------------------------------------

namespace {

RiccatiVolterraSolution solve_marching(const LQModel& md, const TimeGrid& grid,
                                       const LQSolverOptions& opts) {
    const std::size_t N = grid.steps();
    const GainContext ctx{&md, opts.cond_limit};

    RiccatiVolterraSolution sol;
    sol.grid = grid;
    sol.P_rows.resize(N + 1);
    for (std::size_t i = 0; i <= N; ++i) sol.P_rows[i].assign(N + 1 - i, Mat());
    sol.Gamma.assign(N + 1, Mat());

    for (std::size_t i = 0; i <= N; ++i) sol.P_rows[i][N - i] = symmetrize(md.G(grid[i]));
    sol.Gamma[N] = gain(ctx, grid[N], grid[N], sol.P_diag(N));
    if (min_eig_below(sol.P_diag(N), -opts.psd_tol)) sol.nonpsd_warning = true;

    for (std::size_t j = N; j-- > 0;) {
        const double t0 = grid[j], t1 = grid[j + 1];
        const double h = t0 - t1;  // negative: backward step

        // predictor for Gamma(t0): extrapolate from the known nodes
        std::vector<double> ts{t1};
        std::vector<const Mat*> gs{&sol.Gamma[j + 1]};
        if (j + 2 <= N) {
            ts.push_back(grid[j + 2]);
            gs.push_back(&sol.Gamma[j + 2]);
        }
        if (j + 3 <= N) {
            ts.push_back(grid[j + 3]);
            gs.push_back(&sol.Gamma[j + 3]);
        }
        Mat gamma0 = interp_mats(ts, gs, t0);

        std::vector<Mat> stepped(j + 1);
        for (int pass = 0; pass <= opts.corrector_passes; ++pass) {
            // stage gains: quadratic through (t0, gamma0), (t1, .), (t2, .)
            std::vector<double> sts{t0, t1};
            std::vector<const Mat*> sgs{&gamma0, &sol.Gamma[j + 1]};
            if (j + 2 <= N) {
                sts.push_back(grid[j + 2]);
                sgs.push_back(&sol.Gamma[j + 2]);
            }
            const Mat g_t1 = sol.Gamma[j + 1];
            const Mat g_mid = interp_mats(sts, sgs, 0.5 * (t0 + t1));
            const Mat g_t0 = gamma0;

            for (std::size_t i = 0; i <= j; ++i) {
                const double tau_i = grid[i];
                const Mat& P1 = sol.P(i, j + 1);
                const Mat k1 = row_rhs(md, tau_i, t1, P1, g_t1);
                const Mat k2 = row_rhs(md, tau_i, t1 + 0.5 * h, P1 + 0.5 * h * k1, g_mid);
                const Mat k3 = row_rhs(md, tau_i, t1 + 0.5 * h, P1 + 0.5 * h * k2, g_mid);
                const Mat k4 = row_rhs(md, tau_i, t0, P1 + h * k3, g_t0);
                stepped[i] = symmetrize(P1 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
            }
            gamma0 = gain(ctx, t0, t0, stepped[j]);
        }
        for (std::size_t i = 0; i <= j; ++i) sol.P_rows[i][j - i] = stepped[i];
        sol.Gamma[j] = gamma0;
        if (min_eig_below(sol.P_diag(j), -opts.psd_tol)) sol.nonpsd_warning = true;
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Fixed-point (contraction) solver: freeze the gain path, solve rows linearly
// ---------------------------------------------------------------------------

RiccatiVolterraSolution solve_fixed_point(const LQModel& md, const TimeGrid& grid,
                                          const LQSolverOptions& opts) {
    const std::size_t N = grid.steps();
    const GainContext ctx{&md, opts.cond_limit};

    std::vector<Mat> gamma(N + 1);
    for (std::size_t j = 0; j <= N; ++j)
        gamma[j] = gain(ctx, grid[j], grid[j], symmetrize(md.G(grid[j])));

    RiccatiVolterraSolution sol;
    sol.grid = grid;
    auto gamma_interp = [&](double s) {
        const std::size_t k = bracket_index(grid.nodes(), s);
        std::vector<double> ts;
        std::vector<const Mat*> gs;
        const std::size_t lo = k > 0 ? k - 1 : 0;
        for (std::size_t q = lo; q <= std::min(lo + 2, N); ++q) {
            ts.push_back(grid[q]);
            gs.push_back(&gamma[q]);
        }
        return interp_mats(ts, gs, s);
    };

    for (int sweep = 0; sweep < opts.fixed_point_max_iter; ++sweep) {
        sol.P_rows.assign(N + 1, {});
        for (std::size_t i = 0; i <= N; ++i) sol.P_rows[i].assign(N + 1 - i, Mat());
        for (std::size_t i = 0; i <= N; ++i) sol.P_rows[i][N - i] = symmetrize(md.G(grid[i]));

        for (std::size_t j = N; j-- > 0;) {
            const double t0 = grid[j], t1 = grid[j + 1];
            const double h = t0 - t1;
            const Mat g_t1 = gamma[j + 1];
            const Mat g_mid = gamma_interp(0.5 * (t0 + t1));
            const Mat g_t0 = gamma[j];
            for (std::size_t i = 0; i <= j; ++i) {
                const double tau_i = grid[i];
                const Mat& P1 = sol.P(i, j + 1);
                const Mat k1 = row_rhs(md, tau_i, t1, P1, g_t1);
                const Mat k2 = row_rhs(md, tau_i, t1 + 0.5 * h, P1 + 0.5 * h * k1, g_mid);
                const Mat k3 = row_rhs(md, tau_i, t1 + 0.5 * h, P1 + 0.5 * h * k2, g_mid);
                const Mat k4 = row_rhs(md, tau_i, t0, P1 + h * k3, g_t0);
                sol.P_rows[i][j - i] = symmetrize(P1 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
            }
        }

        double defect = 0.0;
        for (std::size_t j = 0; j <= N; ++j) {
            const Mat g_new = gain(ctx, grid[j], grid[j], sol.P_diag(j));
            defect = std::max(defect, (g_new - gamma[j]).norm());
            gamma[j] = g_new;
        }
        sol.iteration_log.push_back(defect);
        if (defect <= opts.fixed_point_tol) break;
        if (sweep + 1 == opts.fixed_point_max_iter)
            throw NoConvergence("Riccati-Volterra fixed point did not converge", sweep + 1, defect);
    }
    sol.Gamma = gamma;
    sol.nonpsd_warning = false;
    for (std::size_t j = 0; j <= N; ++j)
        if (min_eig_below(sol.P_diag(j), -opts.psd_tol)) sol.nonpsd_warning = true;
    return sol;
}

}  // namespace

RiccatiVolterraSolution solve_riccati_volterra(const LQModel& model, const TimeGrid& grid,
                                               const LQSolverOptions& opts) {
    model.validate();
    if (grid.steps() < 8) throw std::domain_error("time grid needs at least 8 steps");
    if (std::abs(grid.horizon() - model.T) > 1e-12 * std::max(1.0, model.T))
        throw std::domain_error("grid horizon does not match the model");
    return opts.mode == LQSolverMode::Marching ? solve_marching(model, grid, opts)
                                               : solve_fixed_point(model, grid, opts);
}

RiccatiVolterraSolution solve_riccati_volterra_deterministic(const LQModel& model,
                                                             const TimeGrid& grid,
                                                             const LQSolverOptions& opts) {
    if (!model.deterministic_sampled())
        throw std::domain_error("deterministic solver requires A1 = B1 = 0");
    RiccatiVolterraSolution sol = solve_riccati_volterra(model, grid, opts);

    // Residual of the state-transition integral form, checked at a few nodes:
    // P(t) = Phi(T,t)' G(t) Phi(T,t) + int_t^T Phi' [Q + Gamma' R Gamma] Phi ds
    const std::size_t N = grid.steps();
    double worst = 0.0;
    for (std::size_t pick = 0; pick < 5; ++pick) {
        const std::size_t j0 = pick * N / 5;
        const double t = grid[j0];
        Mat Phi = Mat::Identity(model.n, model.n);
        Mat acc = Mat::Zero(model.n, model.n);
        auto integrand = [&](std::size_t j, const Mat& Ph) -> Mat {
            const Mat& Gm = sol.Gamma[j];
            return Ph.transpose() *
                   (model.Q(t, grid[j]) + Gm.transpose() * model.R(t, grid[j]) * Gm) * Ph;
        };
        Mat prev = integrand(j0, Phi);
        for (std::size_t j = j0; j < N; ++j) {
            const double h = grid[j + 1] - grid[j];
            // RK4 for Phi' = (A - B Gamma) Phi with linear-in-t gain interp
            auto ab = [&](double s) -> Mat {
                return model.A(s) - model.B(s) * sol.gamma_at(s);
            };
            const Mat k1 = ab(grid[j]) * Phi;
            const Mat k2 = ab(grid[j] + 0.5 * h) * (Phi + 0.5 * h * k1);
            const Mat k3 = ab(grid[j] + 0.5 * h) * (Phi + 0.5 * h * k2);
            const Mat k4 = ab(grid[j + 1]) * (Phi + h * k3);
            Phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            const Mat cur = integrand(j + 1, Phi);
            acc += 0.5 * h * (prev + cur);
            prev = cur;
        }
        const Mat rhs = Phi.transpose() * model.G(t) * Phi + acc;
        const double rel = (rhs - sol.P_diag(j0)).norm() / std::max(1.0, sol.P_diag(j0).norm());
        worst = std::max(worst, rel);
    }
    sol.integral_residual = worst;
    return sol;
}

Vec lq_equilibrium_feedback(const RiccatiVolterraSolution& sol, double t, const Vec& x) {
    if (t < sol.grid.front() - 1e-12 || t > sol.grid.horizon() + 1e-12)
        throw std::domain_error("t outside [0, T]");
    return -sol.gamma_at(t) * x;
}

// ---------------------------------------------------------------------------
// Partition game
// ---------------------------------------------------------------------------

const Mat& LQPartitionSolution::V_coeff(std::size_t j) const {
    const double t = fine[j];
    std::size_t k = partition_interval(partition, t);
    return P(k, j);
}

Mat LQPartitionSolution::jump_left(std::size_t k) const {
    return P(k - 1, part_index[k]);
}

Mat LQPartitionSolution::jump_right(std::size_t k) const {
    return P(k, part_index[k]);
}

LQPartitionSolution lq_partition_game(const LQModel& model, const TimeGrid& partition,
                                      const TimeGrid& fine, const LQSolverOptions& opts) {
    model.validate();
    if (partition.steps() < 1) throw std::domain_error("partition needs at least one interval");
    if (!fine.contains(partition))
        throw std::domain_error("partition nodes must lie on the fine grid");
    const GainContext ctx{&model, opts.cond_limit};

    const std::size_t N = fine.steps();
    const std::size_t Np = partition.steps();  // number of players / rows

    LQPartitionSolution sol;
    sol.fine = fine;
    sol.partition = partition;
    sol.part_index.resize(Np + 1);
    for (std::size_t p = 0; p <= Np; ++p) sol.part_index[p] = fine.index_of(partition[p]);

    sol.P_rows.resize(Np);
    for (std::size_t p = 0; p < Np; ++p) sol.P_rows[p].assign(N + 1 - sol.part_index[p], Mat());
    for (std::size_t p = 0; p < Np; ++p) sol.P_rows[p].back() = symmetrize(model.G(partition[p]));
    sol.Gamma.assign(N + 1, Mat());

    // stacked backward RK4; the gain row is fixed per step and its stage
    // states feed the stage gains exactly
    std::vector<Mat> state(Np), k1(Np), k2(Np), k3(Np), k4(Np), tmp(Np);
    for (std::size_t j = N; j-- > 0;) {
        const double t0 = fine[j], t1 = fine[j + 1];
        const double h = t0 - t1;
        const std::size_t g_row = partition_interval(partition, 0.5 * (t0 + t1));
        const double g_tau = partition[g_row];

        // active rows: p with pi_p <= t0
        std::vector<std::size_t> active;
        for (std::size_t p = 0; p < Np; ++p)
            if (sol.part_index[p] <= j) active.push_back(p);

        for (std::size_t p : active) state[p] = sol.P(p, j + 1);

        auto stage = [&](double s, const std::vector<Mat>& y, std::vector<Mat>& out) {
            const Mat g = gain(ctx, g_tau, s, y[g_row]);
            for (std::size_t p : active) out[p] = row_rhs(model, partition[p], s, y[p], g);
        };

        stage(t1, state, k1);
        for (std::size_t p : active) tmp[p] = state[p] + 0.5 * h * k1[p];
        stage(t1 + 0.5 * h, tmp, k2);
        for (std::size_t p : active) tmp[p] = state[p] + 0.5 * h * k2[p];
        stage(t1 + 0.5 * h, tmp, k3);
        for (std::size_t p : active) tmp[p] = state[p] + h * k3[p];
        stage(t0, tmp, k4);
        for (std::size_t p : active) {
            sol.P_rows[p][j - sol.part_index[p]] =
                symmetrize(state[p] + h / 6.0 * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]));
        }
        sol.Gamma[j] = gain(ctx, g_tau, t0, sol.P(g_row, j));
    }
    // gain at T from the last player's row
    sol.Gamma[N] = gain(ctx, partition[Np - 1], fine[N], sol.P(Np - 1, N));
    return sol;
}

}  // namespace tieq::lq
