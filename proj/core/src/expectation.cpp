#include "gcalc/expectation.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "gcalc/errors.hpp"
#include "gcalc/parallel.hpp"

namespace gcalc {

namespace {

void require_depth(const ScenarioTree& tree, int depth, const char* who) {
    if (depth < 0 || depth > tree.steps())
        throw ValidationError(std::string(who) + ": depth " + std::to_string(depth) +
                              " outside [0, " + std::to_string(tree.steps()) + "]");
}

void require_observable(const ScenarioTree& tree, const CylinderFunctional& x) {
    if (x.last_index() > tree.steps())
        throw ValidationError("expectation: functional observes index " +
                              std::to_string(x.last_index()) + " beyond the grid (" +
                              std::to_string(tree.steps()) + " steps)");
}

// One backward step: parents[i] = opt_level (children[i*b + 2l] + children[i*b + 2l + 1]) / 2.
// The level scan order is fixed and ties keep the first maximizer, so the
// result does not depend on how the slice is partitioned across threads.
void backward_step(const ScenarioTree& tree, const std::vector<double>& children,
                   std::vector<double>& parents, Envelope env) {
    const int n_levels = tree.levels();
    const auto b = static_cast<std::size_t>(tree.branching());
    parallel_for(parents.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t base = i * b;
            double best = 0.5 * (children[base] + children[base + 1]);
            for (int l = 1; l < n_levels; ++l) {
                const double mid = 0.5 * (children[base + static_cast<std::size_t>(2 * l)] +
                                          children[base + static_cast<std::size_t>(2 * l) + 1]);
                if (env == Envelope::upper ? mid > best : mid < best) best = mid;
            }
            parents[i] = best;
        }
    });
}

}  // namespace

std::vector<double> evaluate_on_slice(const ScenarioTree& tree, const CylinderFunctional& x) {
    require_observable(tree, x);
    const int depth = x.last_index();
    const auto& indices = x.observation_indices();
    std::vector<double> values(tree.count(depth));
    parallel_for(values.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<double> coords(indices.size());
        for (std::size_t node = begin; node < end; ++node) {
            // Walk the root path once, reading B at each observed depth.
            std::size_t cur = node;
            int d = depth;
            for (std::size_t pos = indices.size(); pos-- > 0;) {
                cur = tree.ancestor(cur, d, indices[pos]);
                d = indices[pos];
                coords[pos] = tree.b_value(d, cur);
            }
            values[node] = x(coords);
        }
    });
    return values;
}

std::vector<double> lift_to_depth(const ScenarioTree& tree, std::vector<double> values, int from,
                                  int to) {
    require_depth(tree, from, "lift");
    require_depth(tree, to, "lift");
    if (to < from) throw ValidationError("lift: target depth above the source");
    if (values.size() != tree.count(from))
        throw ValidationError("lift: slice size mismatch at depth " + std::to_string(from));
    const auto b = static_cast<std::size_t>(tree.branching());
    for (int k = from; k < to; ++k) {
        std::vector<double> next(tree.count(k + 1));
        parallel_for(next.size(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t j = begin; j < end; ++j) next[j] = values[j / b];
        });
        values = std::move(next);
    }
    return values;
}

NodeProcess backward_values(const ScenarioTree& tree, int depth, std::vector<double> slice,
                            Envelope env) {
    require_depth(tree, depth, "backward induction");
    if (slice.size() != tree.count(depth))
        throw ValidationError("backward induction: slice size " + std::to_string(slice.size()) +
                              " does not match depth " + std::to_string(depth));
    NodeProcess out(tree, 1);
    out.slice(depth) = std::move(slice);
    for (int k = depth - 1; k >= 0; --k) backward_step(tree, out.slice(k + 1), out.slice(k), env);
    // Above the observation depth the value is measurable: lift it.
    const auto b = static_cast<std::size_t>(tree.branching());
    for (int k = depth + 1; k <= tree.steps(); ++k) {
        const auto& prev = out.slice(k - 1);
        auto& cur = out.slice(k);
        parallel_for(cur.size(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t j = begin; j < end; ++j) cur[j] = prev[j / b];
        });
    }
    return out;
}

double slice_expect(const ScenarioTree& tree, int depth, std::span<const double> values,
                    Envelope env) {
    require_depth(tree, depth, "expectation");
    if (values.size() != tree.count(depth))
        throw ValidationError("expectation: slice size mismatch at depth " +
                              std::to_string(depth));
    std::vector<double> cur(values.begin(), values.end());
    for (int k = depth - 1; k >= 0; --k) {
        std::vector<double> parents(tree.count(k));
        backward_step(tree, cur, parents, env);
        cur = std::move(parents);
    }
    return cur[0];
}

double expect(const ScenarioTree& tree, const CylinderFunctional& x) {
    const auto values = evaluate_on_slice(tree, x);
    return slice_expect(tree, x.last_index(), values, Envelope::upper);
}

double expect(const ScenarioTree& tree, const NodeProcess& terminal) {
    if (&terminal.tree() != &tree)
        throw ValidationError("expectation: process lives on a different tree");
    if (terminal.dim() != 1)
        throw ValidationError("expectation: terminal slice must be scalar");
    return slice_expect(tree, tree.steps(), terminal.slice(tree.steps()), Envelope::upper);
}

double lower_expect(const ScenarioTree& tree, const CylinderFunctional& x) {
    const auto values = evaluate_on_slice(tree, x);
    return slice_expect(tree, x.last_index(), values, Envelope::lower);
}

double lower_expect(const ScenarioTree& tree, const NodeProcess& terminal) {
    if (&terminal.tree() != &tree)
        throw ValidationError("expectation: process lives on a different tree");
    if (terminal.dim() != 1)
        throw ValidationError("expectation: terminal slice must be scalar");
    return slice_expect(tree, tree.steps(), terminal.slice(tree.steps()), Envelope::lower);
}

NodeProcess conditional_expect(const ScenarioTree& tree, const CylinderFunctional& x, int k) {
    require_depth(tree, k, "conditional expectation");
    auto values = evaluate_on_slice(tree, x);
    int depth = x.last_index();
    if (depth < k) {
        // Already measurable before t_k: the conditional value is the lift.
        values = lift_to_depth(tree, std::move(values), depth, k);
        depth = k;
    }
    return backward_values(tree, depth, std::move(values), Envelope::upper);
}

NodeProcess conditional_expect(const ScenarioTree& tree, const NodeProcess& terminal, int k) {
    if (&terminal.tree() != &tree)
        throw ValidationError("conditional expectation: process lives on a different tree");
    if (terminal.dim() != 1)
        throw ValidationError("conditional expectation: terminal slice must be scalar");
    require_depth(tree, k, "conditional expectation");
    return backward_values(tree, tree.steps(), terminal.slice(tree.steps()), Envelope::upper);
}

namespace {

struct BruteForce {
    const ScenarioTree& tree;
    const CylinderFunctional& x;
    const std::vector<int>& indices;
    int floor_depth;
    std::size_t budget;
    std::size_t visited = 0;

    // Plain recursion over the same tree: no slices, no parallelism, leaf
    // values recomputed from path coordinates on every visit.
    double run(int depth, std::size_t node, std::vector<double>& coords, std::size_t next_obs) {
        if (++visited > budget)
            throw BudgetError("brute force: more than " + std::to_string(budget) +
                              " node visits required");
        if (next_obs < indices.size() &&
            indices[next_obs] == depth) {
            coords[next_obs] = tree.b_value(depth, node);
            ++next_obs;
        }
        if (depth == floor_depth) return x(coords);
        double best = 0.0;
        for (int l = 0; l < tree.levels(); ++l) {
            const double up = run(depth + 1, tree.child(node, 2 * l), coords, next_obs);
            const double down = run(depth + 1, tree.child(node, 2 * l + 1), coords, next_obs);
            const double mid = 0.5 * (up + down);
            if (l == 0 || mid > best) best = mid;
        }
        return best;
    }
};

}  // namespace

double brute_force_expect(const ScenarioTree& tree, const CylinderFunctional& x,
                          std::size_t max_visited) {
    require_observable(tree, x);
    std::vector<double> coords(static_cast<std::size_t>(x.arity()));
    BruteForce bf{tree, x, x.observation_indices(), x.last_index(), max_visited};
    return bf.run(0, 0, coords, 0);
}

}  // namespace gcalc
