#pragma once

#include <functional>
#include <utility>

namespace tieq {

using ScalarFn = std::function<double(double)>;

// Adaptive Simpson quadrature with absolute tolerance.
double adaptive_simpson(const ScalarFn& f, double a, double b, double abs_tol,
                        int max_depth = 40);

struct Minimum1D {
    double u = 0.0;
    double value = 0.0;
    bool attained = true;
};

// Golden-section search on [lo, hi]. Stops when the bracket width drops below
// width_tol. Handles +inf function values (open-set costs) as long as some
// interior point is finite.
Minimum1D golden_section(const ScalarFn& f, double lo, double hi, double width_tol = 1e-10);

// Minimize on a half line or the whole line by expanding a bracket until the
// interior minimum stops escaping to an edge; attained=false once the edge
// exceeds escape_bound.
Minimum1D minimize_unbounded(const ScalarFn& f, double lo, double hi,
                             double width_tol = 1e-10, double escape_bound = 1e8);

// Classic RK4 update for a scalar ODE y' = f(t, y); h may be negative.
double rk4_step(const std::function<double(double, double)>& f, double t, double y, double h);

}  // namespace tieq
