#pragma once

#include "tieq/grid.hpp"

#include <functional>
#include <utility>

namespace tieq::oracle {

// ---------------------------------------------------------------------------
// Scalar LQ example: dX = u ds + sigma X dW, J = E[ int |u|^2 ds + g(t) X_T^2 ]
// ---------------------------------------------------------------------------

struct LQExampleParams {
    double sigma = 1.0;
    double T = 1.0;
    std::function<double(double)> g;  // terminal weight, positive and continuous

    void validate() const;
};

// Pre-commitment Riccati coefficient P(s,t) for the problem frozen at t.
double lq_riccati_closed_form(const LQExampleParams& p, double t, double s);

// Optimal pair (X(s), u(s)) given the Brownian increment w = W(s) - W(t).
std::pair<double, double> lq_optimal_pair(const LQExampleParams& p, double t, double x, double s,
                                          double w_increment);

// Cost of following the time-t optimal control restricted to [tau, T],
// evaluated at the realized state x_tau; and of re-optimizing at tau.
double lq_cost_restricted(const LQExampleParams& p, double t, double tau, double x_tau);
double lq_cost_reoptimized(const LQExampleParams& p, double tau, double x_tau);

// J(tau, X(tau); u restricted) - J(tau, X(tau); u re-optimized), conditional
// on the realized increment w = W(tau) - W(t). Nonnegative; zero iff
// g(tau) = g(t) or x = 0.
double lq_inconsistency_gap(const LQExampleParams& p, double t, double tau, double x,
                            double w_increment);

// ---------------------------------------------------------------------------
// Generalized Merton example
// ---------------------------------------------------------------------------

struct MertonParams {
    double r = 0.05;
    double mu = 0.10;
    double sigma = 0.2;
    double beta = 0.5;  // rejected above 0.95: exponents 1/(1-beta) lose precision
    double T = 1.0;
    std::function<double(double t, double s)> nu;   // discount kernel on D[0,T]
    std::function<double(double t)> rho;            // terminal weight

    void validate() const;
    double lambda() const;
    // sup over sampled (t,s) pairs of -ln(nu(t,s)/nu(t,t)) / (s-t); throws
    // UnboundedKernel when the sampled sup keeps doubling under refinement
    double lambda_bar(std::size_t base_steps = 64) const;
};

MertonParams classical_merton(double r, double mu, double sigma, double beta, double T,
                              double delta);
MertonParams hyperbolic_merton(double r, double mu, double sigma, double beta, double T,
                               double kappa);

// Pre-commitment value V^t(s,y); y < 0 maps to -inf by the x^beta convention.
double merton_value(const MertonParams& p, double t, double s, double y);

// Pre-commitment feedback pair (amount in stock, consumption rate).
std::pair<double, double> merton_precommit_feedback(const MertonParams& p, double t, double s,
                                                    double y);

// Classical-limit consumption coefficient c/y for the exponential kernel.
double merton_classical_consumption_coeff(const MertonParams& p, double delta, double s);

// True iff the time-inconsistency criterion holds between t and t_bar.
bool merton_inconsistency_indicator(const MertonParams& p, double t, double t_bar,
                                    double tol_quad = 1e-8);

// max over [0,1] of a1^(1-beta) g^beta + a2^(1-beta) (1-g)^beta
std::pair<double, double> concave_allocation_max(double alpha1, double alpha2, double beta);

}  // namespace tieq::oracle
