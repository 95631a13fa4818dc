#include "gcalc/band.hpp"

#include <string>

#include "gcalc/errors.hpp"

namespace gcalc {

VolatilityBand::VolatilityBand(double low_sq, double high_sq)
    : sigma_low_sq(low_sq), sigma_high_sq(high_sq) {
    if (!(low_sq >= 0.0))
        throw ValidationError("volatility band: sigma_low_sq must be >= 0, got " +
                              std::to_string(low_sq));
    if (!(high_sq >= low_sq))
        throw ValidationError("volatility band: sigma_high_sq must be >= sigma_low_sq, got [" +
                              std::to_string(low_sq) + ", " + std::to_string(high_sq) + "]");
}

double g_function(double a, const VolatilityBand& band) {
    const double pos = a > 0.0 ? a : 0.0;
    const double neg = a < 0.0 ? -a : 0.0;
    return 0.5 * (band.sigma_high_sq * pos - band.sigma_low_sq * neg);
}

}  // namespace gcalc
