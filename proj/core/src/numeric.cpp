#include "tieq/common.hpp"
#include "tieq/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace tieq {

double pairwise_sum(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

MeanStderr mean_stderr(std::span<const double> xs) {
    MeanStderr out;
    out.n = xs.size();
    if (out.n == 0) return out;
    out.mean = pairwise_sum(xs) / static_cast<double>(out.n);
    if (out.n == 1) return out;
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = xs[i] - out.mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(out.n - 1);
    out.std_error = std::sqrt(var / static_cast<double>(out.n));
    return out;
}

std::size_t bracket_index(std::span<const double> xs, double x) {
    if (xs.size() < 2) return 0;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::ptrdiff_t k = std::distance(xs.begin(), it) - 1;
    k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(xs.size()) - 2);
    return static_cast<std::size_t>(k);
}

double lerp_on_grid(std::span<const double> xs, std::span<const double> ys, double x) {
    if (xs.empty()) return 0.0;
    if (xs.size() == 1) return ys[0];
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const std::size_t k = bracket_index(xs, x);
    const double w = (x - xs[k]) / (xs[k + 1] - xs[k]);
    return (1.0 - w) * ys[k] + w * ys[k + 1];
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = std::min(x.size(), y.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) return 0.0;
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return (m * sxy - sx * sy) / denom;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& block_fn,
                  int n_threads) {
    if (n == 0) return;
    std::size_t workers = n_threads <= 0 ? std::thread::hardware_concurrency() : n_threads;
    workers = std::clamp<std::size_t>(workers, 1, n);
    if (workers == 1) {
        block_fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::mutex err_mutex;
    std::exception_ptr first_error;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                block_fn(lo, hi);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

double simpson(const ScalarFn& f, double a, double fa, double b, double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const ScalarFn& f, double a, double fa, double b, double fb, double m,
                            double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, lm, flm);
    const double right = simpson(f, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const ScalarFn& f, double a, double b, double abs_tol, int max_depth) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
    const double whole = simpson(f, a, fa, b, fb, m, fm);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

Minimum1D golden_section(const ScalarFn& f, double lo, double hi, double width_tol) {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > width_tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    Minimum1D out;
    out.u = 0.5 * (a + b);
    out.value = f(out.u);
    // endpoints may win when the minimum sits on the boundary
    const double flo = f(lo), fhi = f(hi);
    if (flo < out.value) {
        out.u = lo;
        out.value = flo;
    }
    if (fhi < out.value) {
        out.u = hi;
        out.value = fhi;
    }
    return out;
}

Minimum1D minimize_unbounded(const ScalarFn& f, double lo, double hi, double width_tol,
                             double escape_bound) {
    const bool lo_inf = !std::isfinite(lo);
    const bool hi_inf = !std::isfinite(hi);
    double a = lo_inf ? -1.0 : lo;
    double b = hi_inf ? 1.0 : hi;
    if (a > b) std::swap(a, b);
    if (a == b) b = a + 1.0;
    for (;;) {
        Minimum1D m = golden_section(f, a, b, width_tol * std::max(1.0, b - a));
        const double edge = 1e-6 * (b - a);
        const bool at_lo = lo_inf && (m.u - a) <= edge;
        const bool at_hi = hi_inf && (b - m.u) <= edge;
        if (!at_lo && !at_hi) {
            m = golden_section(f, std::max(a, m.u - 0.1 * (b - a)),
                               std::min(b, m.u + 0.1 * (b - a)), width_tol);
            m.attained = true;
            return m;
        }
        if (std::max(std::abs(a), std::abs(b)) > escape_bound) {
            m.attained = false;
            return m;
        }
        if (at_lo) a = a - 2.0 * (b - a);
        if (at_hi) b = b + 2.0 * (b - a);
    }
}

double rk4_step(const std::function<double(double, double)>& f, double t, double y, double h) {
    const double k1 = f(t, y);
    const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = f(t + h, y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace tieq
