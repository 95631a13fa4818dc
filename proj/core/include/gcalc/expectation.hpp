#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gcalc/functional.hpp"
#include "gcalc/process.hpp"
#include "gcalc/tree.hpp"

namespace gcalc {

enum class Envelope { upper, lower };

// Values of X on the slice at its last observation index, one per node,
// gathered from each node's root path.
std::vector<double> evaluate_on_slice(const ScenarioTree& tree, const CylinderFunctional& x);

// Lifts slice values from depth `from` to depth `to` (to >= from) by copying
// each node's ancestor value, i.e. treats them as measurable at depth `from`.
std::vector<double> lift_to_depth(const ScenarioTree& tree, std::vector<double> values, int from,
                                  int to);

// Adversarial backward induction from a scalar value slice:
//   V(node) = max_level (V(child(level,+)) + V(child(level,-))) / 2
// (min for the lower envelope), with a fixed level scan order so results are
// independent of the thread count. Depths above `depth` are filled by
// lifting. The returned process is defined on every node.
NodeProcess backward_values(const ScenarioTree& tree, int depth, std::vector<double> slice,
                            Envelope env = Envelope::upper);

// Root value of the same recursion using two rolling buffers (no slice
// storage kept).
double slice_expect(const ScenarioTree& tree, int depth, std::span<const double> values,
                    Envelope env = Envelope::upper);

// Upper expectation of a cylinder functional, or of the terminal slice of a
// scalar node process.
double expect(const ScenarioTree& tree, const CylinderFunctional& x);
double expect(const ScenarioTree& tree, const NodeProcess& terminal);

// Lower envelope: -E[-X].
double lower_expect(const ScenarioTree& tree, const CylinderFunctional& x);
double lower_expect(const ScenarioTree& tree, const NodeProcess& terminal);

// Conditional expectation given the depth-k history, returned as a full
// adapted process: backward values below the observation depth, lifted
// values above it. k is range-checked against the grid.
NodeProcess conditional_expect(const ScenarioTree& tree, const CylinderFunctional& x, int k);
NodeProcess conditional_expect(const ScenarioTree& tree, const NodeProcess& terminal, int k);

// Independent oracle for expect(): top-down recursion over the same max/avg
// tree without slice storage or parallelism, evaluating the functional from
// path coordinates at the recursion floor. Throws BudgetError when more than
// max_visited nodes would be visited.
double brute_force_expect(const ScenarioTree& tree, const CylinderFunctional& x,
                          std::size_t max_visited = std::size_t{1} << 22);

}  // namespace gcalc
