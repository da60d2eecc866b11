#include "tieq/oracle.hpp"

#include "tieq/common.hpp"
#include "tieq/numeric.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tieq::oracle {

namespace {
constexpr double kQuadTol = 1e-10;
}

// ---------------------------------------------------------------------------
// LQ example
// ---------------------------------------------------------------------------

void LQExampleParams::validate() const {
    if (!(sigma > 0.0)) throw std::domain_error("sigma must be positive");
    if (!(T > 0.0)) throw std::domain_error("T must be positive");
    if (!g) throw std::domain_error("terminal weight g missing");
}

double lq_riccati_closed_form(const LQExampleParams& p, double t, double s) {
    if (s < t || s > p.T + 1e-12) throw std::domain_error("need t <= s <= T");
    const double s2 = p.sigma * p.sigma;
    const double gt = p.g(t);
    const double e = std::exp(s2 * (p.T - s));
    return s2 * gt * e / (s2 + gt * (e - 1.0));
}

std::pair<double, double> lq_optimal_pair(const LQExampleParams& p, double t, double x, double s,
                                          double w_increment) {
    if (s < t || s > p.T + 1e-12) throw std::domain_error("need t <= s <= T");
    const double s2 = p.sigma * p.sigma;
    const double gt = p.g(t);
    const double num = s2 + gt * (std::exp(s2 * (p.T - s)) - 1.0);
    const double den = s2 + gt * (std::exp(s2 * (p.T - t)) - 1.0);
    const double noise = std::exp(-0.5 * s2 * (s - t) + p.sigma * w_increment);
    const double xs = num / den * noise * x;
    const double us = -lq_riccati_closed_form(p, t, s) * xs;
    return {xs, us};
}

double lq_cost_restricted(const LQExampleParams& p, double t, double tau, double x_tau) {
    const double s2 = p.sigma * p.sigma;
    const double gt = p.g(t), gtau = p.g(tau);
    const double e = std::exp(s2 * (p.T - tau));
    const double den = s2 + gt * (e - 1.0);
    return (gt * gt * (e - 1.0) + s2 * gtau) * s2 * e * x_tau * x_tau / (den * den);
}

double lq_cost_reoptimized(const LQExampleParams& p, double tau, double x_tau) {
    return lq_riccati_closed_form(p, tau, tau) * x_tau * x_tau;
}

double lq_inconsistency_gap(const LQExampleParams& p, double t, double tau, double x,
                            double w_increment) {
    const double s2 = p.sigma * p.sigma;
    const double gt = p.g(t), gtau = p.g(tau);
    const double e_tau = std::exp(s2 * (p.T - tau));
    const double den_t = s2 + gt * (std::exp(s2 * (p.T - t)) - 1.0);
    const double den_tau = s2 + gtau * (e_tau - 1.0);
    const double dg = gt - gtau;
    const double growth = std::exp(s2 * (p.T - tau) - s2 * (tau - t) + 2.0 * p.sigma * w_increment);
    return s2 * s2 * (e_tau - 1.0) * dg * dg * growth * x * x / (den_t * den_t * den_tau);
}

// ---------------------------------------------------------------------------
// Merton example
// ---------------------------------------------------------------------------

void MertonParams::validate() const {
    if (!(mu > r && r > 0.0)) throw std::domain_error("need mu > r > 0");
    if (!(sigma > 0.0)) throw std::domain_error("sigma must be positive");
    if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("beta must be in (0,1)");
    if (beta > 0.95)
        throw std::domain_error("beta > 0.95 rejected: exponent 1/(1-beta) loses precision");
    if (!(T > 0.0)) throw std::domain_error("T must be positive");
    if (!nu || !rho) throw std::domain_error("kernel nu and weight rho required");
}

double MertonParams::lambda() const {
    const double s2 = sigma * sigma;
    const double prem = mu - r;
    return (2.0 * r * s2 * (1.0 - beta) + prem * prem) * beta / (2.0 * s2 * (1.0 - beta));
}

double MertonParams::lambda_bar(std::size_t base_steps) const {
    // log-decay rate of the kernel relative to its diagonal
    const auto sample_sup = [this](std::size_t n) {
        double sup = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double t = T * static_cast<double>(i) / static_cast<double>(n);
            for (std::size_t j = i + 1; j <= n; ++j) {
                const double s = T * static_cast<double>(j) / static_cast<double>(n);
                const double ratio = nu(t, s) / nu(t, t);
                if (!(ratio > 0.0)) throw std::domain_error("kernel must stay positive");
                sup = std::max(sup, -std::log(ratio) / (s - t));
            }
        }
        return sup;
    };
    const double coarse = sample_sup(base_steps);
    const double fine = sample_sup(2 * base_steps);
    // a bounded decay rate settles under refinement; near-doubling means the
    // sup is driven by the shrinking diagonal separation
    if (fine > 1.8 * std::max(coarse, 1e-8) && fine > coarse + 1.0)
        throw UnboundedKernel("kernel log-decay rate grows without bound under grid refinement");
    return fine;
}

MertonParams classical_merton(double r, double mu, double sigma, double beta, double T,
                              double delta) {
    MertonParams p;
    p.r = r;
    p.mu = mu;
    p.sigma = sigma;
    p.beta = beta;
    p.T = T;
    p.nu = [delta](double t, double s) { return std::exp(-delta * (s - t)); };
    p.rho = [delta, T](double t) { return std::exp(-delta * (T - t)); };
    p.validate();
    return p;
}

MertonParams hyperbolic_merton(double r, double mu, double sigma, double beta, double T,
                               double kappa) {
    MertonParams p;
    p.r = r;
    p.mu = mu;
    p.sigma = sigma;
    p.beta = beta;
    p.T = T;
    p.nu = [kappa](double t, double s) { return 1.0 / (1.0 + kappa * (s - t)); };
    p.rho = [kappa, T](double t) { return 1.0 / (1.0 + kappa * (T - t)); };
    p.validate();
    return p;
}

namespace {

// psi(s) = e^{lam/(1-b) (T-s)} rho(t)^{1/(1-b)} + int_s^T e^{lam/(1-b)(tau-s)} nu(t,tau)^{1/(1-b)}
double merton_psi(const MertonParams& p, double t, double s) {
    const double ex = 1.0 / (1.0 - p.beta);
    const double lam = p.lambda();
    const double head = std::exp(lam * ex * (p.T - s)) * std::pow(p.rho(t), ex);
    const double tail = adaptive_simpson(
        [&](double q) { return std::exp(lam * ex * (q - s)) * std::pow(p.nu(t, q), ex); }, s, p.T,
        kQuadTol);
    return head + tail;
}

}  // namespace

double merton_value(const MertonParams& p, double t, double s, double y) {
    if (s < t || s > p.T + 1e-12) throw std::domain_error("need t <= s <= T");
    if (y < 0.0) return -std::numeric_limits<double>::infinity();
    if (y == 0.0) return 0.0;
    return std::pow(merton_psi(p, t, s), 1.0 - p.beta) * std::pow(y, p.beta);
}

std::pair<double, double> merton_precommit_feedback(const MertonParams& p, double t, double s,
                                                    double y) {
    if (y < 0.0) throw std::domain_error("wealth must be nonnegative");
    const double u = (p.mu - p.r) * y / (p.sigma * p.sigma * (1.0 - p.beta));
    const double c = std::pow(p.nu(t, s), 1.0 / (1.0 - p.beta)) * y / merton_psi(p, t, s);
    return {u, c};
}

double merton_classical_consumption_coeff(const MertonParams& p, double delta, double s) {
    const double a = (p.lambda() - delta) / (1.0 - p.beta);
    const double e = std::exp(a * (p.T - s));
    if (std::abs(a) < 1e-12) return 1.0 / (1.0 + (p.T - s));
    return a / (a * e + e - 1.0);
}

bool merton_inconsistency_indicator(const MertonParams& p, double t, double t_bar,
                                    double tol_quad) {
    if (!(t < t_bar && t_bar < p.T)) throw std::domain_error("need t < t_bar < T");
    const double ex = 1.0 / (1.0 - p.beta);
    const double lam = p.lambda();
    const auto side = [&](double base) {
        return adaptive_simpson(
            [&](double q) { return std::pow(std::exp(lam * q) * p.nu(base, q) / p.rho(base), ex); },
            t_bar, p.T, kQuadTol);
    };
    const double lhs = side(t), rhs = side(t_bar);
    return std::abs(lhs - rhs) > tol_quad * (1.0 + std::abs(lhs) + std::abs(rhs));
}

std::pair<double, double> concave_allocation_max(double alpha1, double alpha2, double beta) {
    if (!(alpha1 > 0.0 && alpha2 > 0.0)) throw std::domain_error("alphas must be positive");
    if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("beta must be in (0,1)");
    const double gamma = alpha1 / (alpha1 + alpha2);
    const double value = std::pow(alpha1 + alpha2, 1.0 - beta);
    return {gamma, value};
}

}  // namespace tieq::oracle
