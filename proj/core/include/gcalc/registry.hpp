#pragma once

#include <functional>
#include <string>

#include "gcalc/functional.hpp"

namespace gcalc {

// Named scalar coefficient (t, x) -> R with its Lipschitz constant in x.
// Accepted forms: "zero" | "constant:<c>" | "linear:<a,b>" (a*x + b) | "sin".
// Unknown names or malformed arguments raise ValidationError naming the
// offending field.
struct NamedCoefficient {
    std::string name;
    std::function<double(double, double)> fn;
    double lipschitz;
};
NamedCoefficient make_coefficient(const std::string& spec);

// Perturbation generator: "additive-eps:<base>" maps eps to base + eps; a
// plain coefficient name yields the same coefficient for every eps.
std::function<NamedCoefficient(double)> make_coefficient_family(const std::string& spec);

// Named payoff of the terminal driver coordinate:
// "bt" | "bt_squared" | "bt_call" | "bt_abs".
struct NamedFunctional {
    std::string name;
    std::function<double(double)> payoff;
    GrowthBound growth;
};
NamedFunctional make_functional(const std::string& spec);

}  // namespace gcalc
