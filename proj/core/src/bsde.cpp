#include "gcalc/bsde.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gcalc/errors.hpp"
#include "gcalc/parallel.hpp"

namespace gcalc {

BackwardDrivers BackwardDrivers::scalar(std::function<double(double, double)> f,
                                        std::function<double(double, double)> g, double lip_f,
                                        double lip_g) {
    auto wrap = [](std::function<double(double, double)> fn) -> DriverField {
        return [fn = std::move(fn)](double t, std::span<const double> y, std::span<double> out) {
            out[0] = fn(t, y[0]);
        };
    };
    BackwardDrivers drv;
    drv.dim = 1;
    drv.f = wrap(std::move(f));
    drv.g = wrap(std::move(g));
    drv.lipschitz_f = lip_f;
    drv.lipschitz_g = lip_g;
    return drv;
}

TerminalData TerminalData::from_functional(CylinderFunctional xi) {
    TerminalData data;
    data.functionals_.push_back(std::move(xi));
    return data;
}

TerminalData TerminalData::from_functionals(std::vector<CylinderFunctional> components) {
    if (components.empty()) throw ValidationError("terminal data: no components");
    TerminalData data;
    data.functionals_ = std::move(components);
    return data;
}

TerminalData TerminalData::from_process(NodeProcess xi) {
    TerminalData data;
    data.process_ = std::move(xi);
    return data;
}

int TerminalData::dim() const {
    if (process_) return process_->dim();
    return static_cast<int>(functionals_.size());
}

std::vector<double> TerminalData::leaf_values(const ScenarioTree& tree) const {
    if (!process_ && functionals_.empty())
        throw ValidationError("terminal data: empty, use one of the factories");
    const int n = tree.steps();
    if (process_) {
        if (&process_->tree() != &tree)
            throw ValidationError("terminal data: process lives on a different tree");
        return process_->slice(n);
    }
    const auto d = static_cast<std::size_t>(dim());
    std::vector<double> out(tree.count(n) * d);
    for (std::size_t c = 0; c < d; ++c) {
        auto values = evaluate_on_slice(tree, functionals_[c]);
        values = lift_to_depth(tree, std::move(values), functionals_[c].last_index(), n);
        for (std::size_t i = 0; i < values.size(); ++i) out[i * d + c] = values[i];
    }
    return out;
}

NodeProcess solve_backward(const ScenarioTree& tree, const BackwardDrivers& drivers,
                           const TerminalData& terminal, const BackwardOptions& opts) {
    const int dim = drivers.dim;
    if (dim < 1) throw ValidationError("backward solve: dimension must be >= 1");
    if (terminal.dim() != dim)
        throw ValidationError("backward solve: terminal data dimension " +
                              std::to_string(terminal.dim()) + " does not match drivers (" +
                              std::to_string(dim) + ")");
    if (!drivers.f || !drivers.g)
        throw ValidationError("backward solve: both driver fields are required");
    if (drivers.lipschitz_f < 0.0 || drivers.lipschitz_g < 0.0)
        throw ValidationError("backward solve: Lipschitz constants must be nonnegative");
    if (!(opts.step_tol > 0.0)) throw ValidationError("backward solve: step_tol must be positive");

    const double sigma_hi = tree.band().sigma_high_sq;
    const double contraction =
        (drivers.lipschitz_f + sigma_hi * drivers.lipschitz_g) * tree.grid().mesh();
    if (!(contraction < 1.0))
        throw ValidationError("backward solve: per-step contraction requires (L_f + "
                              "sigma_high_sq L_g) dt < 1, got " +
                              std::to_string(contraction));

    const int n = tree.steps();
    NodeProcess y(tree, dim);
    {
        auto leaves = terminal.leaf_values(tree);
        if (leaves.size() != y.slice(n).size())
            throw ValidationError("backward solve: terminal slice size mismatch");
        y.slice(n) = std::move(leaves);
    }

    const int n_levels = tree.levels();
    const auto d = static_cast<std::size_t>(dim);

    for (int k = n - 1; k >= 0; --k) {
        const double t = tree.grid().t(k);
        const double dt = tree.grid().dt(k);
        const auto& next = y.slice(k + 1);
        auto& cur = y.slice(k);
        parallel_for(tree.count(k), [&](std::size_t begin, std::size_t end) {
            std::vector<double> avg(static_cast<std::size_t>(n_levels) * d);
            std::vector<double> yv(d), fv(d), gv(d), cand(d);
            for (std::size_t i = begin; i < end; ++i) {
                // Children averages per variance level, and the plain
                // all-children mean as the predictor.
                for (std::size_t c = 0; c < d; ++c) yv[c] = 0.0;
                for (int l = 0; l < n_levels; ++l) {
                    const double* up = next.data() + tree.child(i, 2 * l) * d;
                    const double* dn = next.data() + tree.child(i, 2 * l + 1) * d;
                    for (std::size_t c = 0; c < d; ++c) {
                        const double m = 0.5 * (up[c] + dn[c]);
                        avg[static_cast<std::size_t>(l) * d + c] = m;
                        yv[c] += m;
                    }
                }
                for (std::size_t c = 0; c < d; ++c) yv[c] /= static_cast<double>(n_levels);

                // Implicit per-node fixed point; componentwise maximization
                // (the conditional expectation of a vector is componentwise).
                int iter = 0;
                for (;; ++iter) {
                    if (iter > opts.max_inner)
                        throw NumericalError(
                            "backward solve: inner iteration exceeded max_inner at step " +
                            std::to_string(k) + ", node " + std::to_string(i));
                    drivers.f(t, yv, fv);
                    drivers.g(t, yv, gv);
                    for (std::size_t c = 0; c < d; ++c) {
                        double best = 0.0;
                        for (int l = 0; l < n_levels; ++l) {
                            const double val = avg[static_cast<std::size_t>(l) * d + c] +
                                               fv[c] * dt +
                                               gv[c] * tree.vol_levels()[static_cast<std::size_t>(l)] * dt;
                            if (l == 0 || val > best) best = val;
                        }
                        if (!std::isfinite(best))
                            throw NumericalError("backward solve: non-finite value at step " +
                                                 std::to_string(k) + ", node " +
                                                 std::to_string(i));
                        cand[c] = best;
                    }
                    double delta = 0.0;
                    for (std::size_t c = 0; c < d; ++c)
                        delta = std::max(delta, std::abs(cand[c] - yv[c]));
                    yv.swap(cand);
                    if (delta <= opts.step_tol) break;
                }
                for (std::size_t c = 0; c < d; ++c) cur[i * d + c] = yv[c];
            }
        });
    }
    return y;
}

}  // namespace gcalc
