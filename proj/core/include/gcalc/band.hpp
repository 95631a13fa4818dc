#pragma once

namespace gcalc {

// Variance band [sigma_low_sq, sigma_high_sq]: the adversary's per-step
// choice set. Degenerate bands (equal endpoints, including 0) are allowed
// and collapse the calculus to its classical counterpart.
struct VolatilityBand {
    double sigma_low_sq;
    double sigma_high_sq;

    VolatilityBand(double low_sq, double high_sq);

    bool classical() const { return sigma_low_sq == sigma_high_sq; }
};

// G(a) = (sigma_high_sq * a+ - sigma_low_sq * a-) / 2. Positively
// homogeneous and subadditive in a.
double g_function(double a, const VolatilityBand& band);

}  // namespace gcalc
