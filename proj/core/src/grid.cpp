#include "tieq/grid.hpp"

#include "tieq/common.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tieq {

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw std::domain_error("time grid needs at least two nodes");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        if (!(nodes_[i] > nodes_[i - 1]))
            throw std::domain_error("time grid nodes must be strictly increasing");
}

TimeGrid TimeGrid::uniform(double T, std::size_t n_steps) {
    if (!(T > 0.0) || n_steps < 1) throw std::domain_error("bad uniform time grid");
    std::vector<double> nodes(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i)
        nodes[i] = T * static_cast<double>(i) / static_cast<double>(n_steps);
    nodes.back() = T;  // exact
    return TimeGrid(std::move(nodes));
}

double TimeGrid::mesh() const {
    double m = 0.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) m = std::max(m, nodes_[i] - nodes_[i - 1]);
    return m;
}

bool TimeGrid::contains(const TimeGrid& sub) const {
    const double tol = 1e-12 * std::max(1.0, horizon());
    for (double s : sub.nodes()) {
        auto it = std::lower_bound(nodes_.begin(), nodes_.end(), s - tol);
        if (it == nodes_.end() || std::abs(*it - s) > tol) return false;
    }
    return true;
}

std::size_t TimeGrid::index_of(double s) const {
    const double tol = 1e-12 * std::max(1.0, horizon());
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), s - tol);
    if (it == nodes_.end() || std::abs(*it - s) > tol)
        throw std::domain_error("time " + std::to_string(s) + " is not a grid node");
    return static_cast<std::size_t>(std::distance(nodes_.begin(), it));
}

std::size_t partition_interval(const TimeGrid& partition, double s) {
    if (s < partition.front() || s > partition.horizon())
        throw std::domain_error("time outside [0, T]");
    if (s >= partition.horizon()) return partition.steps() - 1;
    return bracket_index(partition.nodes(), s);
}

double partition_clock(const TimeGrid& partition, double s) {
    return partition[partition_interval(partition, s)];
}

SpatialGrid1D::SpatialGrid1D(double x_min, double x_max, std::size_t m_cells)
    : x_min_(x_min), x_max_(x_max), m_(m_cells) {
    if (!(x_min < x_max)) throw std::domain_error("spatial grid needs x_min < x_max");
    if (m_cells < 16) throw std::domain_error("spatial grid needs at least 16 cells");
    h_ = (x_max - x_min) / static_cast<double>(m_cells);
}

}  // namespace tieq
