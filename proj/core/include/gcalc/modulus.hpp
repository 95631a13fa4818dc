#pragma once

namespace gcalc {

// Concave nondecreasing modulus of continuity rho with rho(0+) = 0 and a
// divergent integral of 1/rho at 0+. Two closed-form families:
//
//   linear:   rho(r) = c r,                       c > 0
//   log_type: rho(r) = r ln(1/r)  for r < r_star, extended linearly with
//             matching slope above r_star (r_star <= 1/e keeps the slope
//             nonnegative)
//
// Divergence at 0+ holds analytically for both families and is recorded
// here rather than tested numerically. v(s) is the antiderivative of 1/rho
// anchored at a family-specific base point; the comparison bound
// v_inverse(v(a) + J) does not depend on that anchor.
class ContinuityModulus {
public:
    enum class Family { linear, log_type };

    static ContinuityModulus linear(double c = 1.0);
    static ContinuityModulus log_type(double r_star = 0.13533528323661271);  // exp(-2)

    Family family() const { return family_; }
    double parameter() const { return param_; }

    double operator()(double r) const;

    double v(double s) const;          // s > 0
    double v_inverse(double y) const;  // throws NumericalError on overflow

private:
    ContinuityModulus(Family family, double param);

    Family family_;
    double param_;  // c for linear, r_star for log_type
};

}  // namespace gcalc
