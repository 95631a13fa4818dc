#include "gcalc/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gcalc/errors.hpp"

namespace gcalc {

double lattice_expect(const LatticeSpec& spec, const std::function<double(double)>& payoff,
                      Envelope env) {
    if (!payoff) throw ValidationError("lattice: empty payoff");
    const TimeGrid& grid = spec.grid;
    const int n = grid.steps();
    auto scale_at = [&](int k) {
        const double c = spec.scale ? spec.scale(grid.t(k)) : 1.0;
        if (!std::isfinite(c) || c < 0.0)
            throw ValidationError("lattice: scale must be finite and nonnegative, got " +
                                  std::to_string(c) + " at t = " + std::to_string(grid.t(k)));
        return c;
    };

    // Shared spatial step: largest one-step standard deviation.
    double h2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double c = scale_at(k);
        h2 = std::max(h2, c * c * spec.band.sigma_high_sq * grid.dt(k));
    }
    if (h2 == 0.0) return payoff(0.0);  // deterministic driver
    const double h = std::sqrt(h2);

    // Reachable states after k steps: {-k..k} * h.
    std::vector<double> values(static_cast<std::size_t>(2 * n) + 1);
    for (int j = -n; j <= n; ++j)
        values[static_cast<std::size_t>(j + n)] = payoff(h * static_cast<double>(j));
    for (double v : values)
        if (!std::isfinite(v)) throw NumericalError("lattice: payoff produced a non-finite value");

    std::vector<double> next(values.size());
    for (int k = n - 1; k >= 0; --k) {
        const double c = scale_at(k);
        const double weight_scale = c * c * grid.dt(k) / h2;  // p_up + p_down at variance 1
        for (int j = -k; j <= k; ++j) {
            const std::size_t i = static_cast<std::size_t>(j + n);
            const double mid = values[i];
            const double wings = 0.5 * (values[i + 1] + values[i - 1]);
            // One-step value mid + (c^2 v dt / h^2) (wings - mid): linear in
            // v, so the band endpoint that favors the envelope is exact.
            const double v_opt =
                (env == Envelope::upper) == (wings >= mid) ? spec.band.sigma_high_sq
                                                           : spec.band.sigma_low_sq;
            next[i] = mid + weight_scale * v_opt * (wings - mid);
        }
        std::swap(values, next);
    }
    return values[static_cast<std::size_t>(n)];
}

}  // namespace gcalc
