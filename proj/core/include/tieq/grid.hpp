#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tieq {

// Partition / time mesh t_0 = 0 < ... < t_N = T.
class TimeGrid {
public:
    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> nodes);
    static TimeGrid uniform(double T, std::size_t n_steps);

    std::size_t steps() const { return nodes_.size() - 1; }
    std::size_t size() const { return nodes_.size(); }
    double operator[](std::size_t i) const { return nodes_[i]; }
    double front() const { return nodes_.front(); }
    double horizon() const { return nodes_.back(); }
    double mesh() const;  // max step
    std::span<const double> nodes() const { return nodes_; }

    // true if every node of sub appears (within fp tolerance) in this grid
    bool contains(const TimeGrid& sub) const;
    // index of the node equal to s (throws std::domain_error if absent)
    std::size_t index_of(double s) const;

private:
    std::vector<double> nodes_;
};

// Left endpoint of the partition interval containing s; the terminal time
// maps to the last interior node.
double partition_clock(const TimeGrid& partition, double s);
// Same, returning the partition interval index k with s in [t_k, t_{k+1}).
std::size_t partition_interval(const TimeGrid& partition, double s);

// Uniform spatial axis on [x_min, x_max] with M+1 nodes.
class SpatialGrid1D {
public:
    SpatialGrid1D() = default;
    SpatialGrid1D(double x_min, double x_max, std::size_t m_cells);

    std::size_t points() const { return m_ + 1; }
    double spacing() const { return h_; }
    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    double operator[](std::size_t k) const { return x_min_ + h_ * static_cast<double>(k); }

private:
    double x_min_ = 0.0, x_max_ = 1.0, h_ = 1.0;
    std::size_t m_ = 1;
};

// Index set {(i,j) : tau_i <= t_j} over one shared TimeGrid for tau and t.
// Sharing the axis keeps the diagonal exactly representable.
struct TriangularGrid {
    TimeGrid time;

    std::size_t rows() const { return time.size(); }
    std::size_t row_length(std::size_t i) const { return time.size() - i; }
};

}  // namespace tieq
