#include "gcalc/tree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gcalc/errors.hpp"
#include "gcalc/parallel.hpp"

namespace gcalc {

ScenarioTree::ScenarioTree(TimeGrid grid, VolatilityBand band, std::vector<double> levels)
    : grid_(std::move(grid)), band_(band), levels_(std::move(levels)) {}

std::size_t ScenarioTree::ancestor(std::size_t node, int from, int to) const {
    const auto b = static_cast<std::size_t>(branching());
    for (int d = from; d > to; --d) node /= b;
    return node;
}

ScenarioTree build_tree(const TimeGrid& grid, const VolatilityBand& band,
                        std::vector<double> vol_levels, const TreeLimits& limits) {
    if (vol_levels.empty()) {
        vol_levels = {band.sigma_low_sq, band.sigma_high_sq};
    }
    std::sort(vol_levels.begin(), vol_levels.end());
    vol_levels.erase(std::unique(vol_levels.begin(), vol_levels.end()), vol_levels.end());
    for (double v : vol_levels) {
        if (v < band.sigma_low_sq || v > band.sigma_high_sq)
            throw ValidationError("tree: variance level " + std::to_string(v) +
                                  " lies outside the band");
    }

    const int n = grid.steps();
    const auto branching = 2 * vol_levels.size();
    if (limits.max_nodes == 0) throw BudgetError("tree: node budget must be positive");

    // Budget check before any allocation; counts grow geometrically.
    std::vector<std::size_t> counts(static_cast<std::size_t>(n) + 1);
    std::size_t total = 0;
    std::size_t slice = 1;
    for (int k = 0; k <= n; ++k) {
        counts[static_cast<std::size_t>(k)] = slice;
        if (total > limits.max_nodes - slice)
            throw BudgetError("tree: " + std::to_string(n) + " steps with branching " +
                              std::to_string(branching) + " exceed the node budget of " +
                              std::to_string(limits.max_nodes));
        total += slice;
        if (k < n) {
            if (slice > limits.max_nodes / branching)
                throw BudgetError("tree: " + std::to_string(n) + " steps with branching " +
                                  std::to_string(branching) + " exceed the node budget of " +
                                  std::to_string(limits.max_nodes));
            slice *= branching;
        }
    }

    ScenarioTree tree(grid, band, std::move(vol_levels));
    tree.counts_ = std::move(counts);
    tree.total_ = total;

    const auto n_levels = tree.levels_.size();
    tree.sqrt_vdt_.resize(static_cast<std::size_t>(n) * n_levels);
    for (int k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n_levels; ++l)
            tree.sqrt_vdt_[static_cast<std::size_t>(k) * n_levels + l] =
                std::sqrt(tree.levels_[l] * grid.dt(k));

    tree.b_.resize(static_cast<std::size_t>(n) + 1);
    tree.qv_.resize(static_cast<std::size_t>(n) + 1);
    tree.b_[0] = {0.0};
    tree.qv_[0] = {0.0};
    for (int k = 0; k < n; ++k) {
        const auto parents = tree.count(k);
        auto& b_next = tree.b_[static_cast<std::size_t>(k) + 1];
        auto& qv_next = tree.qv_[static_cast<std::size_t>(k) + 1];
        b_next.resize(parents * branching);
        qv_next.resize(parents * branching);
        const auto& b_cur = tree.b_[static_cast<std::size_t>(k)];
        const auto& qv_cur = tree.qv_[static_cast<std::size_t>(k)];
        parallel_for(parents, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                for (int c = 0; c < static_cast<int>(branching); ++c) {
                    const std::size_t j = i * branching + static_cast<std::size_t>(c);
                    b_next[j] = b_cur[i] + tree.delta_b(k, c);
                    qv_next[j] = qv_cur[i] + tree.delta_qv(k, c);
                }
            }
        });
    }
    return tree;
}

}  // namespace gcalc
