#pragma once

#include "tieq/grid.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace tieq::lq {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

using MatT = std::function<Mat(double t)>;
using MatTauT = std::function<Mat(double tau, double t)>;

// dX = [A X + B u] ds + [A1 X + B1 u] dW,
// J = 1/2 E[ int (<Q(t,s)X,X> + <R(t,s)u,u>) ds + <G(t) X_T, X_T> ]
struct LQModel {
    int n = 1;
    int m = 1;
    MatT A, A1;      // n x n
    MatT B, B1;      // n x m
    MatTauT Q;       // n x n, symmetric PSD
    MatTauT R;       // m x m, symmetric PD
    MatT G;          // n x n, symmetric PSD (argument is tau)
    double T = 1.0;

    void validate() const;
    bool deterministic_sampled() const;  // A1, B1 vanish on sampled nodes
};

// Scalar convenience constructor used by tests and the Example 2.1 family.
LQModel scalar_lq(double T, double A, double B, double A1, double B1,
                  std::function<double(double, double)> Q, std::function<double(double, double)> R,
                  std::function<double(double)> G);

enum class LQSolverMode {
    Marching,    // backward predictor-corrector marching of the coupled rows
    FixedPoint,  // contraction iteration on the gain, rows solved linearly
};

struct LQSolverOptions {
    LQSolverMode mode = LQSolverMode::Marching;
    int corrector_passes = 1;
    double cond_limit = 1e12;      // SingularGain beyond this
    double psd_tol = 1e-8;         // NonPSD warning below -psd_tol
    double fixed_point_tol = 1e-12;
    int fixed_point_max_iter = 80;
};

class RiccatiVolterraSolution {
public:
    TimeGrid grid;
    // row i holds P(tau_i, t_j) for j >= i; row i index k maps to j = i + k.
    std::vector<std::vector<Mat>> P_rows;
    std::vector<Mat> Gamma;            // gain at every node
    std::vector<double> iteration_log; // residual per sweep (fixed-point mode)
    bool nonpsd_warning = false;
    double integral_residual = -1.0;   // deterministic integral-form check, when run

    const Mat& P(std::size_t i, std::size_t j) const { return P_rows[i][j - i]; }
    const Mat& P_diag(std::size_t j) const { return P_rows[j][0]; }
    Mat gamma_at(double t) const;  // linear interpolation between nodes
};

RiccatiVolterraSolution solve_riccati_volterra(const LQModel& model, const TimeGrid& grid,
                                               const LQSolverOptions& opts = {});

// Requires A1 = B1 = 0; additionally evaluates the state-transition integral
// form of the system as a residual check (stored in integral_residual).
RiccatiVolterraSolution solve_riccati_volterra_deterministic(const LQModel& model,
                                                             const TimeGrid& grid,
                                                             const LQSolverOptions& opts = {});

Vec lq_equilibrium_feedback(const RiccatiVolterraSolution& sol, double t, const Vec& x);

// ---------------------------------------------------------------------------
// Partition game: the N-player hierarchical game, exact at the ODE level
// ---------------------------------------------------------------------------

class LQPartitionSolution {
public:
    TimeGrid fine;
    TimeGrid partition;
    std::vector<std::size_t> part_index;  // fine index of each partition node
    // row p holds P^Pi(pi_p, t_j) for fine nodes t_j >= pi_p
    std::vector<std::vector<Mat>> P_rows;
    std::vector<Mat> Gamma;  // gain at every fine node (frozen discount index)

    const Mat& P(std::size_t p, std::size_t j) const { return P_rows[p][j - part_index[p]]; }
    // coefficient of the game value V^Pi at fine node j: P^Pi(ell(t_j), t_j)
    const Mat& V_coeff(std::size_t j) const;
    // one-sided values at interior partition node k (left limit vs value)
    Mat jump_left(std::size_t k) const;
    Mat jump_right(std::size_t k) const;
};

LQPartitionSolution lq_partition_game(const LQModel& model, const TimeGrid& partition,
                                      const TimeGrid& fine, const LQSolverOptions& opts = {});

}  // namespace tieq::lq
