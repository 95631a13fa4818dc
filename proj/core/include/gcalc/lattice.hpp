#pragma once

#include <functional>

#include "gcalc/band.hpp"
#include "gcalc/expectation.hpp"
#include "gcalc/grid.hpp"

namespace gcalc {

// Recombining trinomial lattice for payoffs of the scaled terminal state
//   S_T = int_0^T c(t) dB_t,  S_0 = 0.
// One shared spatial step h = max_k sqrt(c(t_k)^2 * sigma_high_sq * dt_k)
// keeps the lattice recombining; a variance choice v maps to the one-step
// value m + (c^2 v dt / h^2) * (w - m) with w the average of the two outer
// children and m the middle child. That expression is linear in v, so
// optimizing over the band endpoints is exact, and quadratic payoffs are
// reproduced without discretization error.
struct LatticeSpec {
    TimeGrid grid;
    VolatilityBand band;
    std::function<double(double)> scale;  // c(t), nullptr means c == 1
};

double lattice_expect(const LatticeSpec& spec, const std::function<double(double)>& payoff,
                      Envelope env = Envelope::upper);

}  // namespace gcalc
