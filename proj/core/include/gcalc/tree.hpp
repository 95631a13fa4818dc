#pragma once

#include <cstddef>
#include <vector>

#include "gcalc/band.hpp"
#include "gcalc/grid.hpp"

namespace gcalc {

struct TreeLimits {
    std::size_t max_nodes = std::size_t{1} << 20;  // total across all depths
};

// Exact (non-recombining) scenario tree for a one-dimensional driver. Each
// node at depth k has one child per (variance level, sign) pair; the branch
// index is c = 2*level + (sign < 0 ? 1 : 0) and child ids are node*2L + c.
// Edge data: dB = sign * sqrt(v dt_k), d<B> = v dt_k. Driver and
// quadratic-variation values are stored per slice, so the per-scenario
// identity <B>_{k+1} - <B>_k == (B_{k+1} - B_k)^2 holds by construction.
class ScenarioTree {
public:
    const TimeGrid& grid() const { return grid_; }
    const VolatilityBand& band() const { return band_; }
    const std::vector<double>& vol_levels() const { return levels_; }

    int steps() const { return grid_.steps(); }
    int levels() const { return static_cast<int>(levels_.size()); }
    int branching() const { return 2 * levels(); }

    std::size_t count(int depth) const { return counts_[static_cast<std::size_t>(depth)]; }
    std::size_t total_nodes() const { return total_; }

    int level_of(int branch) const { return branch >> 1; }
    double sign_of(int branch) const { return (branch & 1) ? -1.0 : 1.0; }

    std::size_t child(std::size_t node, int branch) const {
        return node * static_cast<std::size_t>(branching()) + static_cast<std::size_t>(branch);
    }
    std::size_t parent(std::size_t node) const {
        return node / static_cast<std::size_t>(branching());
    }
    // Ancestor of a depth `from` node at depth `to` (to <= from).
    std::size_t ancestor(std::size_t node, int from, int to) const;

    // Edge increments for depth -> depth + 1.
    double delta_b(int depth, int branch) const {
        return sign_of(branch) * sqrt_vdt_[static_cast<std::size_t>(depth) * levels_.size() +
                                           static_cast<std::size_t>(level_of(branch))];
    }
    double delta_qv(int depth, int branch) const {
        return levels_[static_cast<std::size_t>(level_of(branch))] * grid_.dt(depth);
    }

    double b_value(int depth, std::size_t node) const {
        return b_[static_cast<std::size_t>(depth)][node];
    }
    double qv_value(int depth, std::size_t node) const {
        return qv_[static_cast<std::size_t>(depth)][node];
    }

private:
    ScenarioTree(TimeGrid grid, VolatilityBand band, std::vector<double> levels);
    friend ScenarioTree build_tree(const TimeGrid&, const VolatilityBand&, std::vector<double>,
                                   const TreeLimits&);

    TimeGrid grid_;
    VolatilityBand band_;
    std::vector<double> levels_;         // ascending, deduplicated
    std::vector<std::size_t> counts_;    // nodes per depth
    std::size_t total_ = 0;
    std::vector<double> sqrt_vdt_;       // [depth * L + level]
    std::vector<std::vector<double>> b_;   // driver values per slice
    std::vector<std::vector<double>> qv_;  // quadratic variation per slice
};

// Deterministic construction. vol_levels defaults to the band endpoints
// (one level for a classical band); every level must lie inside the band.
// Throws BudgetError naming N and the branching factor when the node count
// would exceed limits.max_nodes.
ScenarioTree build_tree(const TimeGrid& grid, const VolatilityBand& band,
                        std::vector<double> vol_levels = {}, const TreeLimits& limits = {});

}  // namespace gcalc
