#include "gcalc/calculus.hpp"

#include <cmath>
#include <string>

#include "gcalc/errors.hpp"
#include "gcalc/parallel.hpp"

namespace gcalc {

namespace {

// Shared forward accumulation: out_{k+1}(child) = out_k(parent) + xi_k(parent) * step(k, branch).
NodeProcess accumulate(const SimpleProcess& eta,
                       const std::function<double(int, int)>& step) {
    const ScenarioTree& tree = eta.tree();
    NodeProcess out(tree, 1, 0.0);
    const auto b = static_cast<std::size_t>(tree.branching());
    for (int k = 0; k < tree.steps(); ++k) {
        const auto& cur = out.slice(k);
        const auto& xi = eta.coefficients().slice(k);
        auto& next = out.slice(k + 1);
        parallel_for(tree.count(k), [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                for (int c = 0; c < static_cast<int>(b); ++c)
                    next[i * b + static_cast<std::size_t>(c)] = cur[i] + xi[i] * step(k, c);
            }
        });
    }
    return out;
}

}  // namespace

NodeProcess ito_integral(const SimpleProcess& eta) {
    const ScenarioTree& tree = eta.tree();
    return accumulate(eta, [&tree](int k, int c) { return tree.delta_b(k, c); });
}

NodeProcess bochner_integral(const SimpleProcess& eta) {
    const ScenarioTree& tree = eta.tree();
    return accumulate(eta, [&tree](int k, int c) { (void)c; return tree.grid().dt(k); });
}

NodeProcess qv_integral(const SimpleProcess& eta) {
    const ScenarioTree& tree = eta.tree();
    return accumulate(eta, [&tree](int k, int c) { return tree.delta_qv(k, c); });
}

double mg_norm(const NodeProcess& x, int p) {
    if (p < 1) throw ValidationError("mg norm: p must be >= 1, got " + std::to_string(p));
    const ScenarioTree& tree = x.tree();
    const int dim = x.dim();
    double total = 0.0;
    std::vector<double> powered;
    for (int k = 0; k < tree.steps(); ++k) {
        powered.assign(tree.count(k), 0.0);
        const auto& s = x.slice(k);
        parallel_for(powered.size(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                double norm_sq = 0.0;
                for (int c = 0; c < dim; ++c) {
                    const double v = s[i * static_cast<std::size_t>(dim) +
                                       static_cast<std::size_t>(c)];
                    norm_sq += v * v;
                }
                powered[i] = p == 2 ? norm_sq : std::pow(std::sqrt(norm_sq), p);
            }
        });
        total += slice_expect(tree, k, powered, Envelope::upper) * tree.grid().dt(k);
    }
    return p == 2 ? std::sqrt(total) : std::pow(total, 1.0 / p);
}

}  // namespace gcalc
