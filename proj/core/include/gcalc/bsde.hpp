#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gcalc/expectation.hpp"
#include "gcalc/functional.hpp"
#include "gcalc/process.hpp"

namespace gcalc {

// Driver field (t, y) -> R^n, written into out.
using DriverField = std::function<void(double t, std::span<const double> y, std::span<double> out)>;

// Drivers for Y_t = E[ xi + int f ds + int g d<B> | history ]. Declared
// Lipschitz constants in y are required by the solver's per-step implicit
// fixed point; modulus-style declarations belong to the stability layer.
struct BackwardDrivers {
    int dim = 1;
    DriverField f;  // ds term
    DriverField g;  // d<B> term
    double lipschitz_f = 0.0;
    double lipschitz_g = 0.0;

    static BackwardDrivers scalar(std::function<double(double, double)> f,
                                  std::function<double(double, double)> g, double lip_f,
                                  double lip_g);
};

// Terminal condition: a cylinder functional of the driver path, one
// functional per component, or the terminal slice of an existing process
// (e.g. a forward solution).
class TerminalData {
public:
    // Empty until one of the factories fills it; using an empty instance
    // raises ValidationError.
    TerminalData() = default;

    static TerminalData from_functional(CylinderFunctional xi);
    static TerminalData from_functionals(std::vector<CylinderFunctional> components);
    static TerminalData from_process(NodeProcess xi);

    int dim() const;
    // Values on the depth-N slice, component-major per node.
    std::vector<double> leaf_values(const ScenarioTree& tree) const;

private:
    std::vector<CylinderFunctional> functionals_;
    std::optional<NodeProcess> process_;
};

struct BackwardOptions {
    double step_tol = 1e-12;
    int max_inner = 64;
};

// Backward sweep with one implicit fixed point per node inside the variance
// maximization:
//   Y_k = max_v { (Y_{k+1}(v,+) + Y_{k+1}(v,-)) / 2 + f(t_k,Y_k) dt + g(t_k,Y_k) v dt }.
// Vector values are handled componentwise (the conditional expectation of a
// vector is componentwise). Requires the per-step contraction
// (L_f + sigma_high_sq * L_g) * max dt < 1; the inner iteration starts from
// the plain average of the children and stops when the update falls below
// step_tol (NumericalError past max_inner).
NodeProcess solve_backward(const ScenarioTree& tree, const BackwardDrivers& drivers,
                           const TerminalData& terminal, const BackwardOptions& opts = {});

}  // namespace gcalc
