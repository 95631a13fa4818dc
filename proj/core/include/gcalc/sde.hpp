#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gcalc/modulus.hpp"
#include "gcalc/process.hpp"

namespace gcalc {

// Coefficient field (t, x) -> R^n, written into out (out.size() == dim).
using VectorField = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

// Declared regularity for a coefficient set: either a common Lipschitz
// constant, or integral-Lipschitz data (alpha(t), rho) bounding the sum of
// squared increments by alpha(t)^2 rho(|dx|^2). Growth weights alpha1/alpha2
// are recorded and audited when present but carry no further semantics.
struct Regularity {
    std::optional<double> lipschitz;
    std::optional<ContinuityModulus> modulus;
    std::function<double(double)> alpha;   // weight for the modulus form, default 1
    std::function<double(double)> alpha1;  // growth: |b|^2+|h|^2+|sigma|^2 <= alpha1^2 + alpha2^2 |x|^2
    std::function<double(double)> alpha2;
};

struct ForwardCoefficients {
    int dim = 1;
    VectorField drift;      // dt term
    VectorField qv_drift;   // d<B> term
    VectorField diffusion;  // dB term
    Regularity regularity;

    static ForwardCoefficients scalar(std::function<double(double, double)> b,
                                      std::function<double(double, double)> h,
                                      std::function<double(double, double)> sigma,
                                      Regularity reg = {});
};

// Explicit Euler transport along every branch:
//   X_{k+1} = X_k + b dt + h d<B> + sigma dB.
// Coefficients are evaluated once per node; a non-finite value raises
// NumericalError naming the step, time and node.
NodeProcess solve_forward(const ScenarioTree& tree, const ForwardCoefficients& coeffs,
                          std::span<const double> x0);

struct AssumptionCheckConfig {
    int samples = 4096;
    double box_halfwidth = 10.0;
    double t_low = 0.0;
    double t_high = 1.0;
    std::uint64_t seed = 0xa0d17ull;
    double slack = 1e-9;  // relative tolerance on the declared bound
};

struct CoefficientAudit {
    std::string name;  // "b", "h", "sigma", "sum", "growth"
    double ratio;      // worst sampled ratio against the declared bound
    bool pass;
};

struct AssumptionReport {
    std::vector<CoefficientAudit> entries;
    bool lipschitz_mode = true;
    bool pass = false;
};

// Sampled audit of the declared regularity. Lipschitz mode compares each
// coefficient's increment ratio |phi(t,x)-phi(t,y)| / |x-y| to the declared
// constant; modulus mode compares squared increments to alpha(t)^2
// rho(|x-y|^2), per coefficient and summed. The growth row appears when
// alpha1/alpha2 are declared. Throws ValidationError if neither a Lipschitz
// constant nor modulus data is declared.
AssumptionReport check_assumptions(const ForwardCoefficients& coeffs,
                                   const AssumptionCheckConfig& cfg = {});

}  // namespace gcalc
