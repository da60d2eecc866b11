#pragma once

#include "tieq/grid.hpp"

#include <vector>

namespace tieq {

// Feedback values on the full (time x space) lattice, interpolated bilinearly
// and clamped to the grid box when evaluated off-node.
class PolicyGrid {
public:
    PolicyGrid() = default;
    PolicyGrid(TimeGrid time, SpatialGrid1D space)
        : time_(std::move(time)), space_(space),
          values_(time_.size() * space_.points(), 0.0) {}

    double& at(std::size_t j, std::size_t k) { return values_[j * space_.points() + k]; }
    double at(std::size_t j, std::size_t k) const { return values_[j * space_.points() + k]; }

    double eval(double t, double x) const;

    const TimeGrid& time() const { return time_; }
    const SpatialGrid1D& space() const { return space_; }
    bool empty() const { return values_.empty(); }

private:
    TimeGrid time_;
    SpatialGrid1D space_;
    std::vector<double> values_;
};

// Theta(tau_i, t_j, x_k) on {tau_i <= t_j} x spatial grid. Slice i is stored
// contiguously over j = i..N_t; the diagonal V(t_j, x_k) = Theta(t_j,t_j,x_k)
// is a view into the same storage, never a copy.
class BivariateField {
public:
    BivariateField() = default;
    BivariateField(TimeGrid time, SpatialGrid1D space);

    double& theta(std::size_t i, std::size_t j, std::size_t k) {
        return slices_[i][(j - i) * space_.points() + k];
    }
    double theta(std::size_t i, std::size_t j, std::size_t k) const {
        return slices_[i][(j - i) * space_.points() + k];
    }

    // pointer to the (tau_i, t_j) slab of length space().points()
    double* slab(std::size_t i, std::size_t j) {
        return slices_[i].data() + (j - i) * space_.points();
    }
    const double* slab(std::size_t i, std::size_t j) const {
        return slices_[i].data() + (j - i) * space_.points();
    }

    const TimeGrid& time() const { return time_; }
    const SpatialGrid1D& space() const { return space_; }

    class DiagonalView {
    public:
        explicit DiagonalView(const BivariateField* f) : f_(f) {}
        double operator()(std::size_t j, std::size_t k) const { return f_->theta(j, j, k); }
        const double* slab(std::size_t j) const { return f_->slab(j, j); }

    private:
        const BivariateField* f_;
    };

    DiagonalView diagonal() const { return DiagonalView(this); }

private:
    TimeGrid time_;
    SpatialGrid1D space_;
    std::vector<std::vector<double>> slices_;
};

}  // namespace tieq
