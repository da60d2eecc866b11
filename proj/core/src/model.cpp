#include "tieq/model.hpp"

#include "tieq/common.hpp"
#include "tieq/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace tieq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// ControlSet
// ---------------------------------------------------------------------------

ControlSet ControlSet::interval(double lo_, double hi_) {
    ControlSet u;
    u.kind = Kind::Interval;
    u.m = 1;
    u.lo = {lo_};
    u.hi = {hi_};
    u.validate();
    return u;
}

ControlSet ControlSet::real_line(int m_) {
    ControlSet u;
    u.kind = Kind::RealLine;
    u.m = m_;
    u.lo.assign(static_cast<std::size_t>(m_), -kInf);
    u.hi.assign(static_cast<std::size_t>(m_), kInf);
    u.validate();
    return u;
}

ControlSet ControlSet::box(std::vector<double> lo_, std::vector<double> hi_) {
    ControlSet u;
    u.kind = Kind::Box;
    u.m = static_cast<int>(lo_.size());
    u.lo = std::move(lo_);
    u.hi = std::move(hi_);
    u.validate();
    return u;
}

void ControlSet::validate() const {
    if (m < 1) throw std::domain_error("control dimension must be positive");
    if (lo.size() != static_cast<std::size_t>(m) || hi.size() != static_cast<std::size_t>(m))
        throw std::domain_error("control set bounds have wrong dimension");
    for (int i = 0; i < m; ++i)
        if (!(lo[static_cast<std::size_t>(i)] < hi[static_cast<std::size_t>(i)]))
            throw std::domain_error("control set bounds must be ordered");
}

bool ControlSet::contains(std::span<const double> u, double tol) const {
    if (u.size() != static_cast<std::size_t>(m)) return false;
    for (int i = 0; i < m; ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (u[k] < lo[k] - tol || u[k] > hi[k] + tol) return false;
    }
    return true;
}

bool ControlSet::bounded() const {
    for (int i = 0; i < m; ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (!std::isfinite(lo[k]) || !std::isfinite(hi[k])) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// GeneralModel
// ---------------------------------------------------------------------------

double GeneralModel::sigma_at(double t, double x, std::span<const double> u) const {
    return diffusion_control_free ? sigma(t, x) : sigma_u(t, x, u);
}

double GeneralModel::a(double t, double x, std::span<const double> u) const {
    const double s = sigma_at(t, x, u);
    return 0.5 * s * s;
}

void GeneralModel::validate() const {
    if (!(T > 0.0)) throw std::domain_error("model horizon T must be positive");
    control_set.validate();
    if (!drift || !running || !terminal) throw std::domain_error("model callables missing");
    if (diffusion_control_free && !sigma)
        throw std::domain_error("control-free model needs sigma(t,x)");
    if (!diffusion_control_free && !sigma_u)
        throw std::domain_error("controlled-diffusion model needs sigma(t,x,u)");
}

void GeneralModel::check_cost_sign(double x_lo, double x_hi, std::uint64_t seed) const {
    if (cost_sign != CostSign::Nonnegative) return;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(x_lo, x_hi);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<double> u(static_cast<std::size_t>(control_set.m));
    for (int trial = 0; trial < 512; ++trial) {
        const double t = u01(rng) * T;
        const double tau = u01(rng) * t;
        const double x = ux(rng);
        for (int i = 0; i < control_set.m; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double lo = std::isfinite(control_set.lo[k]) ? control_set.lo[k] : -10.0;
            const double hi = std::isfinite(control_set.hi[k]) ? control_set.hi[k] : 10.0;
            u[k] = lo + u01(rng) * (hi - lo);
        }
        if (running(tau, t, x, u) < -1e-12)
            throw std::domain_error("running cost is negative on sampled points");
        if (terminal(tau, x) < -1e-12)
            throw std::domain_error("terminal cost is negative on sampled points");
    }
}

// ---------------------------------------------------------------------------
// Hamiltonian and selectors
// ---------------------------------------------------------------------------

static void check_pair_domain(const GeneralModel& model, double tau, double t) {
    if (!(0.0 <= tau && tau <= t && t <= model.T + 1e-12))
        throw std::domain_error("(tau, t) outside D[0,T]");
}

double hamiltonian(const GeneralModel& model, double tau, double t, double x,
                   std::span<const double> u, double p, double P) {
    check_pair_domain(model, tau, t);
    if (!model.control_set.contains(u)) throw std::domain_error("control outside U");
    return model.drift(t, x, u) * p + model.a(t, x, u) * P + model.running(tau, t, x, u);
}

namespace {

// objective without the domain checks, for inner minimization loops
double ham_value(const GeneralModel& model, double tau, double t, double x,
                 std::span<const double> u, double p, double P) {
    return model.drift(t, x, u) * p + model.a(t, x, u) * P + model.running(tau, t, x, u);
}

SelectorResult numeric_minimize(const GeneralModel& model, double tau, double t, double x,
                                double p, double P, double reg_eps) {
    const ControlSet& U = model.control_set;
    std::vector<double> u(static_cast<std::size_t>(U.m), 0.0);
    const auto objective = [&](std::span<const double> w) {
        double v = ham_value(model, tau, t, x, w, p, P);
        if (reg_eps > 0.0) {
            double n2 = 0.0;
            for (double wi : w) n2 += wi * wi;
            v += reg_eps * n2;
        }
        return v;
    };

    SelectorResult out;
    if (U.m == 1) {
        const auto f = [&](double w) {
            const double arr[1] = {w};
            return objective(std::span<const double>(arr, 1));
        };
        Minimum1D m;
        if (std::isfinite(U.lo[0]) && std::isfinite(U.hi[0]))
            m = golden_section(f, U.lo[0], U.hi[0], kSelectorTol * 1e-2);
        else
            m = minimize_unbounded(f, U.lo[0], U.hi[0], kSelectorTol * 1e-2);
        // smallest-norm tie break on flat minima
        const double zero[1] = {0.0};
        if (U.contains(std::span<const double>(zero, 1)) &&
            f(0.0) <= m.value + 1e-14 * (1.0 + std::abs(m.value)))
            m = Minimum1D{0.0, f(0.0), m.attained};
        out.u_star = {m.u};
        out.H = m.value;
        out.achieved = m.attained;
        return out;
    }

    // cyclic coordinate descent on boxes
    std::vector<double> w(static_cast<std::size_t>(U.m), 0.0);
    for (int i = 0; i < U.m; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double lo = std::isfinite(U.lo[k]) ? U.lo[k] : -1.0;
        const double hi = std::isfinite(U.hi[k]) ? U.hi[k] : 1.0;
        w[k] = 0.5 * (lo + hi);
    }
    bool attained = true;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double move = 0.0;
        for (int i = 0; i < U.m; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const auto f = [&](double wi) {
                const double saved = w[k];
                w[k] = wi;
                const double v = objective(w);
                w[k] = saved;
                return v;
            };
            Minimum1D m;
            if (std::isfinite(U.lo[k]) && std::isfinite(U.hi[k]))
                m = golden_section(f, U.lo[k], U.hi[k], kSelectorTol * 1e-2);
            else
                m = minimize_unbounded(f, U.lo[k], U.hi[k], kSelectorTol * 1e-2);
            attained = attained && m.attained;
            move = std::max(move, std::abs(m.u - w[k]));
            w[k] = m.u;
        }
        if (move < kSelectorTol) break;
    }
    out.u_star = w;
    out.H = objective(w);
    out.achieved = attained;
    return out;
}

}  // namespace

SelectorResult minimize_hamiltonian(const GeneralModel& model, double tau, double t, double x,
                                    double p, double P) {
    check_pair_domain(model, tau, t);
    if (model.selector) return (*model.selector)(tau, t, x, p, P);
    return numeric_minimize(model, tau, t, x, p, P, 0.0);
}

SelectorResult regularized_minimize(const GeneralModel& model, double eps, double tau, double t,
                                    double x, double p, double P) {
    if (!(eps > 0.0)) throw std::domain_error("regularization eps must be positive");
    check_pair_domain(model, tau, t);
    SelectorResult r = numeric_minimize(model, tau, t, x, p, P, eps);
    r.achieved = true;  // attainment guaranteed on closed U for the regularized objective
    return r;
}

// ---------------------------------------------------------------------------
// Catalog models
// ---------------------------------------------------------------------------

GeneralModel make_example33(double T, Kernel2 R, SigmaTX sigma) {
    GeneralModel m;
    m.name = "example33";
    m.T = T;
    m.control_set = ControlSet::interval(0.0, 1.0);
    m.diffusion_control_free = true;
    m.sigma = std::move(sigma);
    m.drift = [](double, double, std::span<const double> u) { return u[0]; };
    m.running = [R](double tau, double t, double, std::span<const double> u) {
        return R(tau, t) * u[0];
    };
    m.terminal = [](double, double) { return 0.0; };
    m.selector = [R, m2 = m.sigma](double tau, double t, double x, double p,
                                   double P) -> SelectorResult {
        const double r = R(tau, t);
        const double s = m2(t, x);
        const double u = (p + r < 0.0) ? 1.0 : 0.0;  // ties resolve to the smaller norm
        SelectorResult out;
        out.u_star = {u};
        out.H = 0.5 * s * s * P + std::min(p + r, 0.0);
        out.achieved = true;
        return out;
    };
    m.selector_discontinuous = true;
    m.discontinuity_gap = [R](double tau, double t, double, double p) { return p + R(tau, t); };
    return m;
}

GeneralModel make_example34(double T, Kernel2 R, SigmaTX sigma) {
    GeneralModel m;
    m.name = "example34";
    m.T = T;
    m.control_set = ControlSet::interval(-1.0, 1.0);
    m.diffusion_control_free = true;
    m.sigma = std::move(sigma);
    m.drift = [](double, double, std::span<const double> u) { return u[0]; };
    m.running = [R](double tau, double t, double, std::span<const double> u) {
        return 0.5 * R(tau, t) * u[0] * u[0];
    };
    m.terminal = [](double, double) { return 0.0; };
    m.selector = [R, sg = m.sigma](double tau, double t, double x, double p,
                                   double P) -> SelectorResult {
        const double r = R(tau, t);
        const double s = sg(t, x);
        const double mag = std::min(std::abs(p) / r, 1.0);
        const double u = (p > 0.0 ? -mag : (p < 0.0 ? mag : 0.0));
        SelectorResult out;
        out.u_star = {u};
        out.H = p * u + 0.5 * s * s * P + 0.5 * r * u * u;
        out.achieved = true;
        return out;
    };
    return m;
}

GeneralModel make_example35(double T, Kernel2 R, SigmaTX sigma) {
    GeneralModel m;
    m.name = "example35";
    m.T = T;
    m.control_set = ControlSet::interval(-1.0, 1.0);  // cost blows up at the edges
    m.diffusion_control_free = true;
    m.sigma = std::move(sigma);
    m.drift = [](double, double, std::span<const double> u) { return u[0]; };
    m.running = [R](double tau, double t, double, std::span<const double> u) {
        const double one_m = 1.0 - u[0] * u[0];
        if (one_m <= 0.0) return std::numeric_limits<double>::infinity();
        return -R(tau, t) * std::log(one_m);
    };
    m.terminal = [](double, double) { return 0.0; };
    m.selector = [R, sg = m.sigma](double tau, double t, double x, double p,
                                   double P) -> SelectorResult {
        const double r = R(tau, t);
        const double s = sg(t, x);
        const double u = -p / (r + std::sqrt(r * r + p * p));
        SelectorResult out;
        out.u_star = {u};
        out.H = p * u + 0.5 * s * s * P - r * std::log(1.0 - u * u);
        out.achieved = true;
        return out;
    };
    return m;
}

GeneralModel make_lq1d(double T, double sigma_mult, double sigma_add, Kernel2 wR, Kernel2 wQ,
                       Weight1 wG) {
    GeneralModel m;
    m.name = "lq1d";
    m.T = T;
    m.control_set = ControlSet::real_line(1);
    m.diffusion_control_free = true;
    m.sigma = [sigma_mult, sigma_add](double, double x) { return sigma_mult * x + sigma_add; };
    m.drift = [](double, double, std::span<const double> u) { return u[0]; };
    m.running = [wR, wQ](double tau, double t, double x, std::span<const double> u) {
        return wR(tau, t) * u[0] * u[0] + wQ(tau, t) * x * x;
    };
    m.terminal = [wG](double tau, double x) { return wG(tau) * x * x; };
    m.selector = [wR, wQ, sg = m.sigma](double tau, double t, double x, double p,
                                        double P) -> SelectorResult {
        const double r = wR(tau, t);
        const double u = -p / (2.0 * r);
        const double s = sg(t, x);
        SelectorResult out;
        out.u_star = {u};
        out.H = p * u + 0.5 * s * s * P + r * u * u + wQ(tau, t) * x * x;
        out.achieved = true;
        return out;
    };
    return m;
}

GeneralModel make_merton_log(const MertonLogSpec& spec) {
    if (!(spec.beta > 0.0 && spec.beta < 1.0)) throw std::domain_error("beta must be in (0,1)");
    if (!(spec.mu > spec.r && spec.r > 0.0)) throw std::domain_error("need mu > r > 0");
    const double beta = spec.beta;
    const double kappa = (spec.mu - spec.r) / (spec.sigma * spec.sigma * (1.0 - beta));
    const double vol = spec.sigma * kappa;  // constant in log-wealth
    const double base_drift = spec.r + (spec.mu - spec.r) * kappa - 0.5 * vol * vol;

    GeneralModel m;
    m.name = "merton_log";
    m.T = spec.T;
    m.control_set = ControlSet::interval(0.0, std::numeric_limits<double>::infinity());
    m.diffusion_control_free = true;
    m.cost_sign = GeneralModel::CostSign::DeclaredBounded;  // sign-flipped payoff
    m.sigma = [vol](double, double) { return vol; };
    m.drift = [base_drift](double, double, std::span<const double> u) {
        return base_drift - u[0];
    };
    m.running = [nu = spec.nu, beta](double tau, double t, double y, std::span<const double> u) {
        return -nu(tau, t) * std::pow(u[0], beta) * std::exp(beta * y);
    };
    m.terminal = [rho = spec.rho, beta](double tau, double y) {
        return -rho(tau) * std::exp(beta * y);
    };
    m.selector = [nu = spec.nu, beta, vol, base_drift](double tau, double t, double y, double p,
                                                       double P) -> SelectorResult {
        SelectorResult out;
        if (p >= 0.0) {
            // objective decreases without bound in the consumption rate
            out.u_star = {0.0};
            out.H = -std::numeric_limits<double>::infinity();
            out.achieved = false;
            return out;
        }
        const double nv = nu(tau, t);
        const double gamma =
            std::pow(nv * beta * std::exp(beta * y) / (-p), 1.0 / (1.0 - beta));
        out.u_star = {gamma};
        out.H = p * (base_drift - gamma) + 0.5 * vol * vol * P -
                nv * std::pow(gamma, beta) * std::exp(beta * y);
        out.achieved = true;
        return out;
    };
    return m;
}

GeneralModel make_custom(const CustomModelSpec& spec) {
    GeneralModel m;
    m.name = "custom";
    m.T = spec.T;
    m.control_set = spec.control_set;
    m.diffusion_control_free = true;
    if (spec.declared_bounded) m.cost_sign = GeneralModel::CostSign::DeclaredBounded;
    const Expr b = Expr::parse(spec.drift);
    const Expr s = Expr::parse(spec.sigma);
    const Expr g = Expr::parse(spec.running);
    const Expr h = Expr::parse(spec.terminal);
    m.drift = [b](double t, double x, std::span<const double> u) {
        return b.eval({.tau = 0.0, .t = t, .x = x, .u = u[0]});
    };
    m.sigma = [s](double t, double x) { return s.eval({.tau = 0.0, .t = t, .x = x, .u = 0.0}); };
    m.running = [g](double tau, double t, double x, std::span<const double> u) {
        return g.eval({.tau = tau, .t = t, .x = x, .u = u[0]});
    };
    m.terminal = [h](double tau, double x) {
        return h.eval({.tau = tau, .t = 0.0, .x = x, .u = 0.0});
    };
    if (spec.control_set.m != 1)
        throw ConfigError("custom expression models support scalar controls only");
    return m;
}

}  // namespace tieq
