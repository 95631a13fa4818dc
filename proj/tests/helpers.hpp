#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gcalc/expectation.hpp"
#include "gcalc/tree.hpp"

namespace testutil {

inline std::vector<double> terminal_slice(const gcalc::ScenarioTree& tree,
                                          const gcalc::CylinderFunctional& x) {
    auto values = gcalc::evaluate_on_slice(tree, x);
    return gcalc::lift_to_depth(tree, std::move(values), x.last_index(), tree.steps());
}

// Expectation under one explicit volatility policy table: the level chosen
// at internal node (k, i) is bit offsets[k] + i of mask, and the two signs
// of that level are averaged. Plain recursion, no optimization anywhere.
inline double policy_value(const gcalc::ScenarioTree& tree, const std::vector<double>& leaves,
                           std::uint64_t mask, const std::vector<std::size_t>& offsets,
                           int depth, std::size_t node) {
    if (depth == tree.steps()) return leaves[node];
    const auto bit = offsets[static_cast<std::size_t>(depth)] + node;
    const int level = static_cast<int>((mask >> bit) & 1ull);
    const double up =
        policy_value(tree, leaves, mask, offsets, depth + 1, tree.child(node, 2 * level));
    const double down =
        policy_value(tree, leaves, mask, offsets, depth + 1, tree.child(node, 2 * level + 1));
    return 0.5 * (up + down);
}

// Sup over ALL adapted policy tables by exhaustive enumeration. Independent
// of the engine's dynamic program; needs two volatility levels and at most
// 21 internal nodes (depth <= 3).
inline double policy_sup_expect(const gcalc::ScenarioTree& tree,
                                const std::vector<double>& leaves) {
    if (tree.levels() != 2) throw std::runtime_error("policy enumeration needs two levels");
    std::vector<std::size_t> offsets(static_cast<std::size_t>(tree.steps()));
    std::size_t bits = 0;
    for (int k = 0; k < tree.steps(); ++k) {
        offsets[static_cast<std::size_t>(k)] = bits;
        bits += tree.count(k);
    }
    if (bits > 21) throw std::runtime_error("policy table too large to enumerate");
    double best = -std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask)
        best = std::max(best, policy_value(tree, leaves, mask, offsets, 0, 0));
    return best;
}

// Sup over deterministic (time-only) level schedules: the level may depend
// on the depth but not on the node. Strictly weaker than adapted policies.
inline double open_loop_sup(const gcalc::ScenarioTree& tree, const std::vector<double>& leaves) {
    if (tree.levels() != 2) throw std::runtime_error("schedule enumeration needs two levels");
    const int n = tree.steps();
    double best = -std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        // offsets such that the bit depends on depth only
        std::vector<std::size_t> offsets(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) offsets[static_cast<std::size_t>(k)] = 0;
        // reuse policy_value with a per-depth mask: build a table mask where
        // every node at depth k gets bit k of the schedule
        std::uint64_t table = 0;
        std::size_t bits = 0;
        for (int k = 0; k < n; ++k) {
            offsets[static_cast<std::size_t>(k)] = bits;
            const std::uint64_t bit = (mask >> k) & 1ull;
            for (std::size_t i = 0; i < tree.count(k); ++i) table |= bit << (bits + i);
            bits += tree.count(k);
        }
        best = std::max(best, policy_value(tree, leaves, table, offsets, 0, 0));
    }
    return best;
}

// Dense Gaussian elimination with partial pivoting; throws on a (near)
// singular matrix. Used as an independent oracle for fixed-point systems.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-13) throw std::runtime_error("singular linear system");
        std::swap(a[piv], a[col]);
        std::swap(rhs[piv], rhs[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double m = a[r][col] / a[col][col];
            if (m == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= m * a[col][c];
            rhs[r] -= m * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

}  // namespace testutil
