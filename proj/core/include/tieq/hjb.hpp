#pragma once

#include "tieq/field.hpp"
#include "tieq/grid.hpp"
#include "tieq/model.hpp"

#include <vector>

namespace tieq::hjb {

enum class BoundaryRule {
    Unset,
    Linearity,  // zero second derivative at the box edges
};

enum class DriftStencil {
    Central,  // second order; monotone only up to the mesh Peclet bound
    Upwind,   // first order, unconditionally monotone
    Hybrid,   // central where monotone, upwind fallback per node
};

struct GridSpec {
    SpatialGrid1D space;
    TimeGrid time;
    BoundaryRule boundary = BoundaryRule::Unset;
};

struct SchemeOptions {
    DriftStencil drift = DriftStencil::Central;
    int n_threads = 1;
};

struct StepDiagnostics {
    double max_drift_cfl = 0.0;       // max |b| dt / h over the solve
    double max_boundary_outflow = 0.0;  // outward |b| dt / h at the box edges
    std::size_t upwind_fallbacks = 0;   // hybrid mode only
    std::size_t locus_crossings = 0;    // selector discontinuity locus hits
};

struct ClassicalSolution {
    GridSpec grids;
    std::vector<double> values;  // (N_t+1) x (M+1), j-major
    PolicyGrid psi;
    StepDiagnostics diag;

    double at(std::size_t j, std::size_t k) const {
        return values[j * grids.space.points() + k];
    }
};

// Pre-commitment / per-player solve: HJB with the discount index frozen at
// tau. Policy is recomputed each step from the previous time level.
ClassicalSolution classical_hjb(const GeneralModel& model, double tau_frozen,
                                const GridSpec& grids, const SchemeOptions& opts = {});

// Linear backward solve of one tau-slice under a given feedback, from level
// j_hi (terminal slab supplied) down to level j_lo. Returns slabs for
// j = j_lo..j_hi, j-major.
std::vector<double> solve_theta_slice(const GeneralModel& model, const PolicyGrid& psi,
                                      double tau, const GridSpec& grids,
                                      const std::vector<double>& terminal, std::size_t j_hi,
                                      std::size_t j_lo, const SchemeOptions& opts = {},
                                      StepDiagnostics* diag = nullptr);

// ---------------------------------------------------------------------------
// Partition game on the grid
// ---------------------------------------------------------------------------

class PartitionGameSolution {
public:
    GridSpec grids;
    TimeGrid partition;
    std::vector<std::size_t> part_index;      // fine index of each partition node
    std::vector<std::vector<double>> slices;  // row p: slabs over j >= part_index[p]
    PolicyGrid psi;
    StepDiagnostics diag;

    double theta(std::size_t p, std::size_t j, std::size_t k) const {
        return slices[p][(j - part_index[p]) * grids.space.points() + k];
    }
    // game value at fine node j: the slice selected by the partition clock
    // (identity V = Theta(ell(t), t, x) holds by construction of this view)
    double value(std::size_t j, std::size_t k) const;
    // one-sided values at interior partition node index kp
    double value_left(std::size_t kp, std::size_t k) const;
    double value_right(std::size_t kp, std::size_t k) const;
};

PartitionGameSolution solve_partition_game(const GeneralModel& model, const TimeGrid& partition,
                                           const GridSpec& grids, const SchemeOptions& opts = {});

// ---------------------------------------------------------------------------
// Equilibrium HJB: windowed diagonal fixed point
// ---------------------------------------------------------------------------

struct EquilibriumOptions {
    double tol = 1e-6;
    int max_iter = 60;          // sweeps per window
    double window = 0.0;        // initial window length; 0 picks T/4
    SchemeOptions scheme;
};

struct EquilibriumSolution {
    BivariateField theta;
    PolicyGrid psi;
    double residual = 0.0;  // scheme defect of the equilibrium equation
    int iters = 0;          // total sweeps over all windows
    std::vector<double> window_log;  // final defect per window

    BivariateField::DiagonalView V() const { return theta.diagonal(); }
};

EquilibriumSolution solve_equilibrium_hjb(const GeneralModel& model, const GridSpec& grids,
                                          const EquilibriumOptions& opts = {});

// ---------------------------------------------------------------------------
// Partition refinement study
// ---------------------------------------------------------------------------

struct ConvergenceRow {
    std::size_t n_intervals;
    double mesh;
    double gap;  // sup |V^Pi - V| over nodes
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double fitted_order = 0.0;
};

ConvergenceTable refine_and_compare(const GeneralModel& model,
                                    const std::vector<std::size_t>& partition_sizes,
                                    const GridSpec& grids, const EquilibriumOptions& opts = {});

}  // namespace tieq::hjb
