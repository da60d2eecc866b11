#pragma once

#include "tieq/grid.hpp"
#include "tieq/oracle.hpp"

#include <utility>
#include <vector>

namespace tieq::merton {

using oracle::MertonParams;

struct MertonSolverOptions {
    double tol = 1e-8;
    int max_iter = 400;
    double omega = 0.5;       // Picard damping, halved when the defect grows
    bool normalize = true;    // scale (nu, rho) jointly so max nu <= beta
};

// Solution of the diagonal integral equation for z(t) = phi(t,t) / nu(t,t).
// z is invariant under joint scaling of (nu, rho); kappa records the payoff
// normalization applied to reach max nu <= beta.
class MertonEquilibrium {
public:
    TimeGrid grid;
    std::vector<double> z;
    std::vector<double> phi_diag;         // nu(t,t) z(t), raw payoff scale
    std::vector<double> phi_diag_scaled;  // kappa * phi_diag
    std::vector<double> lower, upper;     // projection envelopes per node
    double kappa = 1.0;
    double beta = 0.5;
    double lambda = 0.0;
    double lambda_bar = 0.0;              // +inf encoded as infinity()
    int iterations = 0;
    double residual = 0.0;                // sup-norm fixed-point defect ||F(z)-z||

    double z_at(double t) const;
    double consumption_coeff(double t) const;  // c / x = z(t)^{1/(beta-1)}
};

MertonEquilibrium solve_merton_equilibrium(const MertonParams& params, const TimeGrid& grid,
                                           const MertonSolverOptions& opts = {});

// Envelopes of Proposition-6.2 type for the diagonal equation, computed from
// the kernel's diagonal-relative log-decay rate.
std::pair<std::vector<double>, std::vector<double>> prop62_bounds(const MertonParams& params,
                                                                  const TimeGrid& grid);

// Equilibrium feedback pair (amount invested, consumption rate) at wealth x.
std::pair<double, double> merton_equilibrium_feedback(const MertonEquilibrium& eq,
                                                      const MertonParams& params, double t,
                                                      double x);

// Off-diagonal phi(tau, t) reconstructed from the solved diagonal; the value
// field is Theta(tau,t,x) = phi(tau,t) x^beta (raw payoff scale).
double merton_theta_offdiagonal(const MertonEquilibrium& eq, const MertonParams& params,
                                double tau, double t);

}  // namespace tieq::merton
