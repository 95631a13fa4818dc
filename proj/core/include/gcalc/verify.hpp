#pragma once

#include <cstdint>

#include "gcalc/band.hpp"
#include "gcalc/functional.hpp"
#include "gcalc/report.hpp"
#include "gcalc/rng.hpp"
#include "gcalc/tree.hpp"

namespace gcalc {

// Random Lipschitz (occasionally polynomially-growing) cylinder functional
// on the tree's grid: a short sum of ridge terms with known constants, so
// the declared growth bound always passes its audit.
CylinderFunctional random_cylinder_functional(const ScenarioTree& tree, Rng& rng,
                                              int max_arity = 3);

struct VerifyOptions {
    VolatilityBand band{0.5, 1.0};
    double horizon = 1.0;
    int steps = 6;            // exact-tree depth for DP and oracle suites
    int lattice_steps = 200;  // per unit time, envelope and distribution checks
    int random_pairs = 100;   // axiom property checks
    int random_processes = 100;
    int random_functionals = 20;  // per depth in the oracle suite
    int jensen_functionals = 50;
    std::uint64_t seed = 0x9cull;
};

// Self-check suite over the whole engine: expectation axioms and their
// conditional forms, DP vs recursion oracle, integral identities and
// inequalities, envelope values, classical reduction, distributional
// stability, Jensen, and the comparison-bound closed forms. Each row records
// the worst observed metric against its pinned tolerance.
VerifyReport run_verify(const VerifyOptions& opts = {});

}  // namespace gcalc
