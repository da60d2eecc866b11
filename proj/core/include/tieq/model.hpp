#pragma once

#include "tieq/expr.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tieq {

// ---------------------------------------------------------------------------
// Control sets
// ---------------------------------------------------------------------------

struct ControlSet {
    enum class Kind { Interval, RealLine, Box };

    Kind kind = Kind::RealLine;
    int m = 1;
    std::vector<double> lo;  // per coordinate; +-inf allowed
    std::vector<double> hi;

    static ControlSet interval(double lo, double hi);
    static ControlSet real_line(int m = 1);
    static ControlSet box(std::vector<double> lo, std::vector<double> hi);

    bool contains(std::span<const double> u, double tol = 1e-12) const;
    bool bounded() const;
    void validate() const;
};

// ---------------------------------------------------------------------------
// Problem data: scalar state, m-dimensional control
// ---------------------------------------------------------------------------

struct SelectorResult {
    std::vector<double> u_star;
    double H = 0.0;
    bool achieved = true;
};

// Closed-form arg-min selector supplied by catalog models.
using ClosedFormSelector =
    std::function<SelectorResult(double tau, double t, double x, double p, double P)>;

class GeneralModel {
public:
    using DriftFn = std::function<double(double t, double x, std::span<const double> u)>;
    using SigmaXFn = std::function<double(double t, double x)>;
    using SigmaUFn = std::function<double(double t, double x, std::span<const double> u)>;
    using RunningFn =
        std::function<double(double tau, double t, double x, std::span<const double> u)>;
    using TerminalFn = std::function<double(double tau, double x)>;

    enum class CostSign {
        Nonnegative,      // (H2): g, h >= 0, checked on sampled points
        DeclaredBounded,  // bounded below on bounded state boxes by construction
    };

    std::string name = "custom";
    double T = 1.0;
    ControlSet control_set;
    bool diffusion_control_free = true;
    CostSign cost_sign = CostSign::Nonnegative;

    DriftFn drift;
    SigmaXFn sigma;      // used when diffusion_control_free
    SigmaUFn sigma_u;    // used otherwise
    RunningFn running;
    TerminalFn terminal;

    // optional closed-form selector; numeric fallback used when absent
    std::optional<ClosedFormSelector> selector;
    bool selector_discontinuous = false;
    // signed distance to the selector discontinuity locus, when one exists
    std::function<double(double tau, double t, double x, double p)> discontinuity_gap;

    double a(double t, double x, std::span<const double> u) const;
    double sigma_at(double t, double x, std::span<const double> u) const;

    void validate() const;
    // sample g, h over [0,T] x [x_lo, x_hi] x U and fail on negative values
    // for Nonnegative-cost models
    void check_cost_sign(double x_lo, double x_hi, std::uint64_t seed = 13) const;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline constexpr double kSelectorTol = 1e-8;

double hamiltonian(const GeneralModel& model, double tau, double t, double x,
                   std::span<const double> u, double p, double P);

SelectorResult minimize_hamiltonian(const GeneralModel& model, double tau, double t, double x,
                                    double p, double P);

SelectorResult regularized_minimize(const GeneralModel& model, double eps, double tau, double t,
                                    double x, double p, double P);

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

using Kernel2 = std::function<double(double, double)>;   // (tau, t)
using Weight1 = std::function<double(double)>;           // (tau)
using SigmaTX = std::function<double(double, double)>;   // (t, x)

// dX = u ds + sigma(t,x) dW on U=[0,1], running cost R(tau,t) u. The selector
// is an indicator with a discontinuity along p + R = 0.
GeneralModel make_example33(double T, Kernel2 R, SigmaTX sigma);

// dX = u ds + sigma(t,x) dW on U=[-1,1], running cost R(tau,t) u^2 / 2.
GeneralModel make_example34(double T, Kernel2 R, SigmaTX sigma);

// dX = u ds + sigma(t,x) dW on U=(-1,1), running cost -R(tau,t) ln(1-u^2).
GeneralModel make_example35(double T, Kernel2 R, SigmaTX sigma);

// dX = u ds + (sigma_mult x + sigma_add) dW, g = wR(tau,t) u^2 + wQ(tau,t) x^2,
// h = wG(tau) x^2, U = R. Covers the scalar LQ family used throughout.
GeneralModel make_lq1d(double T, double sigma_mult, double sigma_add, Kernel2 wR, Kernel2 wQ,
                       Weight1 wG);

struct MertonLogSpec {
    double r, mu, sigma, beta, T;
    Kernel2 nu;     // nu(tau, t)
    Weight1 rho;    // rho(tau)
};

// Generalized Merton consumption problem in log-wealth coordinates with the
// investment fraction frozen at its equilibrium value, so the diffusion is
// control-free and the remaining control is the consumption rate per unit
// wealth. Values carry a flipped sign: the solver minimizes -payoff.
GeneralModel make_merton_log(const MertonLogSpec& spec);

struct CustomModelSpec {
    double T = 1.0;
    std::string drift;     // vars t, x, u
    std::string sigma;     // vars t, x
    std::string running;   // vars tau, t, x, u
    std::string terminal;  // vars tau, x
    ControlSet control_set;
    // declare the costs bounded below (on bounded boxes) instead of nonnegative
    bool declared_bounded = false;
};

GeneralModel make_custom(const CustomModelSpec& spec);

}  // namespace tieq
