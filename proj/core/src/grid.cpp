#include "gcalc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gcalc/errors.hpp"

namespace gcalc {

TimeGrid TimeGrid::uniform(double horizon, int steps) {
    if (steps < 0) throw ValidationError("time grid: steps must be >= 0");
    if (steps == 0) {
        if (horizon != 0.0)
            throw ValidationError("time grid: steps == 0 requires horizon == 0");
        return TimeGrid(std::vector<double>{0.0});
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ValidationError("time grid: horizon must be positive and finite, got " +
                              std::to_string(horizon));
    std::vector<double> nodes(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k)
        nodes[static_cast<std::size_t>(k)] = horizon * static_cast<double>(k) / steps;
    nodes.back() = horizon;  // exact endpoint
    return TimeGrid(std::move(nodes));
}

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw ValidationError("time grid: at least one node required");
    if (nodes_.front() != 0.0) throw ValidationError("time grid: t_0 must be 0");
    for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
        if (!(nodes_[k + 1] > nodes_[k]))
            throw ValidationError("time grid: nodes must be strictly increasing at index " +
                                  std::to_string(k + 1));
    }
    if (!std::isfinite(nodes_.back()))
        throw ValidationError("time grid: horizon must be finite");
}

double TimeGrid::t(int k) const {
    if (k < 0 || k >= static_cast<int>(nodes_.size()))
        throw ValidationError("time grid: node index " + std::to_string(k) + " out of range");
    return nodes_[static_cast<std::size_t>(k)];
}

double TimeGrid::dt(int k) const {
    if (k < 0 || k + 1 >= static_cast<int>(nodes_.size()))
        throw ValidationError("time grid: step index " + std::to_string(k) + " out of range");
    return nodes_[static_cast<std::size_t>(k) + 1] - nodes_[static_cast<std::size_t>(k)];
}

double TimeGrid::mesh() const {
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) m = std::max(m, nodes_[k + 1] - nodes_[k]);
    return m;
}

}  // namespace gcalc
