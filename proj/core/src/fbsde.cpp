#include "gcalc/fbsde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

#include "gcalc/calculus.hpp"
#include "gcalc/errors.hpp"
#include "gcalc/parallel.hpp"
#include "gcalc/rng.hpp"

namespace gcalc {

namespace {

// 2 sqrt 6 + 2 sqrt 2.
constexpr double kContractionSlope = 7.727406610312547;

void require_data(const FbsdeData& data) {
    if (!data.b || !data.h || !data.sigma || !data.f || !data.g)
        throw ValidationError("fbsde: all five coefficients are required");
    if (data.xi.dim() != 1) throw ValidationError("fbsde: terminal data must be scalar");
    if (!(data.lipschitz_k >= 0.0))
        throw ValidationError("fbsde: the joint Lipschitz constant must be nonnegative");
}

void audit_joint_lipschitz(const FbsdeData& data, double horizon) {
    Rng rng(0xfb5dull);
    const double k = data.lipschitz_k;
    const XyCoefficient* fields[] = {&data.b, &data.h, &data.sigma, &data.f, &data.g};
    const char* names[] = {"b", "h", "sigma", "f", "g"};
    for (int sample = 0; sample < 256; ++sample) {
        const double t = rng.uniform(0.0, horizon);
        const double x1 = rng.uniform(-5.0, 5.0), y1 = rng.uniform(-5.0, 5.0);
        const double x2 = rng.uniform(-5.0, 5.0), y2 = rng.uniform(-5.0, 5.0);
        const double allowed = k * (std::abs(x1 - x2) + std::abs(y1 - y2));
        for (int c = 0; c < 5; ++c) {
            const double gap = std::abs((*fields[c])(t, x1, y1) - (*fields[c])(t, x2, y2));
            if (gap > allowed * (1.0 + 1e-9) + 1e-12)
                throw ValidationError(std::string("fbsde: coefficient ") + names[c] +
                                      " violates the declared joint Lipschitz constant " +
                                      std::to_string(k));
        }
    }
}

}  // namespace

ContractionCheck contraction_check(double lipschitz_k, double horizon) {
    if (!(lipschitz_k >= 0.0) || !(horizon >= 0.0))
        throw ValidationError("contraction check: negative inputs");
    const double factor = kContractionSlope * lipschitz_k * std::sqrt(horizon);
    return {factor, factor < 1.0};
}

ProcessPair lambda_map(const ScenarioTree& tree, const FbsdeData& data, const ProcessPair& in) {
    require_data(data);
    if (&in.x.tree() != &tree || &in.y.tree() != &tree)
        throw ValidationError("fbsde: input pair lives on a different tree");
    if (in.x.dim() != 1 || in.y.dim() != 1)
        throw ValidationError("fbsde: input pair must be scalar");

    const int n = tree.steps();
    const auto b = static_cast<std::size_t>(tree.branching());
    const int n_levels = tree.levels();

    // First component: forward Euler from x0, coefficients read at the
    // input pair (Jacobi update).
    NodeProcess x_out(tree, 1);
    x_out.at(0, 0) = data.x0;
    for (int k = 0; k < n; ++k) {
        const double t = tree.grid().t(k);
        const double dt = tree.grid().dt(k);
        const auto& cur = x_out.slice(k);
        auto& next = x_out.slice(k + 1);
        const auto& xin = in.x.slice(k);
        const auto& yin = in.y.slice(k);
        parallel_for(tree.count(k), [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const double bv = data.b(t, xin[i], yin[i]);
                const double hv = data.h(t, xin[i], yin[i]);
                const double sv = data.sigma(t, xin[i], yin[i]);
                if (!std::isfinite(bv) || !std::isfinite(hv) || !std::isfinite(sv))
                    throw NumericalError("fbsde: non-finite forward coefficient at step " +
                                         std::to_string(k) + ", node " + std::to_string(i));
                for (std::size_t br = 0; br < b; ++br)
                    next[i * b + br] = cur[i] + bv * dt + hv * tree.delta_qv(k, static_cast<int>(br)) +
                                       sv * tree.delta_b(k, static_cast<int>(br));
            }
        });
    }

    // Second component: single conditional-expectation sweep from the
    // terminal data, driver terms read at the input pair (no implicit step:
    // the drivers do not depend on the output).
    NodeProcess y_out(tree, 1);
    y_out.slice(n) = data.xi.leaf_values(tree);
    for (int k = n - 1; k >= 0; --k) {
        const double t = tree.grid().t(k);
        const double dt = tree.grid().dt(k);
        const auto& next = y_out.slice(k + 1);
        auto& cur = y_out.slice(k);
        const auto& xin = in.x.slice(k);
        const auto& yin = in.y.slice(k);
        parallel_for(tree.count(k), [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const double fv = data.f(t, xin[i], yin[i]);
                const double gv = data.g(t, xin[i], yin[i]);
                if (!std::isfinite(fv) || !std::isfinite(gv))
                    throw NumericalError("fbsde: non-finite backward coefficient at step " +
                                         std::to_string(k) + ", node " + std::to_string(i));
                double best = 0.0;
                for (int l = 0; l < n_levels; ++l) {
                    const double mid = 0.5 * (next[tree.child(i, 2 * l)] +
                                              next[tree.child(i, 2 * l + 1)]);
                    const double val =
                        mid + gv * tree.vol_levels()[static_cast<std::size_t>(l)] * dt;
                    if (l == 0 || val > best) best = val;
                }
                cur[i] = best + fv * dt;
            }
        });
    }
    return {std::move(x_out), std::move(y_out)};
}

double product_norm(const ProcessPair& p) { return mg_norm(p.x, 2) + mg_norm(p.y, 2); }

double product_norm_sum_squares(const ProcessPair& p) {
    const double nx = mg_norm(p.x, 2);
    const double ny = mg_norm(p.y, 2);
    return std::sqrt(nx * nx + ny * ny);
}

FbsdeResult solve_fbsde(const ScenarioTree& tree, const FbsdeData& data,
                        const FbsdeOptions& opts) {
    require_data(data);
    if (!(opts.tol > 0.0)) throw ValidationError("fbsde: tolerance must be positive");
    if (opts.max_iter < 1) throw ValidationError("fbsde: max_iter must be >= 1");

    const auto check = contraction_check(data.lipschitz_k, tree.grid().horizon());
    if (!check.admissible && !opts.force) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.4f", check.factor);
        throw ValidationError("fbsde: contraction factor " + std::string(buf) +
                              " is not < 1; pass force to iterate anyway");
    }
    if (opts.audit) audit_joint_lipschitz(data, tree.grid().horizon());

    // Canonical start: frozen initial state and the conditional expectation
    // of the terminal data.
    ProcessPair pair{NodeProcess(tree, 1, data.x0),
                     backward_values(tree, tree.steps(), data.xi.leaf_values(tree))};

    std::vector<double> residuals;
    bool converged = false;
    int iterations = 0;
    while (iterations < opts.max_iter) {
        ProcessPair next = lambda_map(tree, data, pair);
        if (opts.gauss_seidel) {
            // Recompute the second component against the fresh first one.
            ProcessPair staged{next.x, pair.y};
            ProcessPair refreshed = lambda_map(tree, data, staged);
            next.y = std::move(refreshed.y);
        }
        const double r = product_norm({difference(next.x, pair.x), difference(next.y, pair.y)});
        residuals.push_back(r);
        pair = std::move(next);
        ++iterations;
        if (r <= opts.tol) {
            converged = true;
            break;
        }
    }

    const double nsr = product_norm(pair);
    const double nss = product_norm_sum_squares(pair);
    return FbsdeResult{std::move(pair), iterations,         std::move(residuals), converged,
                       opts.force && !check.admissible,      check.factor,        nsr,
                       nss};
}

}  // namespace gcalc
