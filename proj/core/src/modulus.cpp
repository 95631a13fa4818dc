#include "gcalc/modulus.hpp"

#include <cmath>
#include <string>

#include "gcalc/errors.hpp"

namespace gcalc {

namespace {

constexpr double kInvE = 0.36787944117144233;  // 1/e
constexpr double kExpCap = 700.0;              // exp beyond this overflows

}  // namespace

ContinuityModulus::ContinuityModulus(Family family, double param)
    : family_(family), param_(param) {}

ContinuityModulus ContinuityModulus::linear(double c) {
    if (!(c > 0.0)) throw ValidationError("modulus: linear slope must be positive");
    return ContinuityModulus(Family::linear, c);
}

ContinuityModulus ContinuityModulus::log_type(double r_star) {
    if (!(r_star > 0.0) || r_star > kInvE)
        throw ValidationError("modulus: log-type switch point must lie in (0, 1/e]");
    return ContinuityModulus(Family::log_type, r_star);
}

double ContinuityModulus::operator()(double r) const {
    if (r < 0.0) throw ValidationError("modulus: negative argument");
    if (r == 0.0) return 0.0;
    if (family_ == Family::linear) return param_ * r;
    if (r < param_) return r * std::log(1.0 / r);
    // Linear continuation with the matching slope ln(1/r*) - 1 >= 0.
    const double slope = std::log(1.0 / param_) - 1.0;
    return param_ * std::log(1.0 / param_) + slope * (r - param_);
}

double ContinuityModulus::v(double s) const {
    if (!(s > 0.0)) throw ValidationError("modulus: v is defined for positive arguments");
    if (family_ == Family::linear) return std::log(s) / param_;  // anchor r0 = 1
    const double r_star = param_;
    if (s < r_star) {
        // int_{r*}^{s} dr / (r ln(1/r)) = ln ln(1/r*) - ln ln(1/s), negative below r*.
        return std::log(std::log(1.0 / r_star)) - std::log(std::log(1.0 / s));
    }
    const double rho_star = r_star * std::log(1.0 / r_star);
    const double slope = std::log(1.0 / r_star) - 1.0;
    if (slope == 0.0) return (s - r_star) / rho_star;
    return std::log1p(slope * (s - r_star) / rho_star) / slope;
}

double ContinuityModulus::v_inverse(double y) const {
    if (family_ == Family::linear) {
        const double e = param_ * y;
        if (e > kExpCap)
            throw NumericalError("modulus: comparison bound overflows (exponent " +
                                 std::to_string(e) + ")");
        return std::exp(e);
    }
    const double r_star = param_;
    if (y < 0.0) {
        // ln ln(1/s) = ln ln(1/r*) - y; s -> 0 as y -> -inf (underflow is benign).
        const double inner = std::log(1.0 / r_star) * std::exp(-y);
        if (inner > kExpCap) return 0.0;
        return std::exp(-inner);
    }
    const double rho_star = r_star * std::log(1.0 / r_star);
    const double slope = std::log(1.0 / r_star) - 1.0;
    if (slope == 0.0) return r_star + rho_star * y;
    const double e = slope * y;
    if (e > kExpCap)
        throw NumericalError("modulus: comparison bound overflows (exponent " +
                             std::to_string(e) + ")");
    return r_star + rho_star * (std::exp(e) - 1.0) / slope;
}

}  // namespace gcalc
