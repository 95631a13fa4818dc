#include "gcalc/sde.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gcalc/errors.hpp"
#include "gcalc/parallel.hpp"
#include "gcalc/rng.hpp"

namespace gcalc {

ForwardCoefficients ForwardCoefficients::scalar(std::function<double(double, double)> b,
                                                std::function<double(double, double)> h,
                                                std::function<double(double, double)> sigma,
                                                Regularity reg) {
    auto wrap = [](std::function<double(double, double)> fn) -> VectorField {
        return [fn = std::move(fn)](double t, std::span<const double> x, std::span<double> out) {
            out[0] = fn(t, x[0]);
        };
    };
    ForwardCoefficients coeffs;
    coeffs.dim = 1;
    coeffs.drift = wrap(std::move(b));
    coeffs.qv_drift = wrap(std::move(h));
    coeffs.diffusion = wrap(std::move(sigma));
    coeffs.regularity = std::move(reg);
    return coeffs;
}

NodeProcess solve_forward(const ScenarioTree& tree, const ForwardCoefficients& coeffs,
                          std::span<const double> x0) {
    const int dim = coeffs.dim;
    if (dim < 1) throw ValidationError("forward solve: dimension must be >= 1");
    if (static_cast<int>(x0.size()) != dim)
        throw ValidationError("forward solve: x0 has dimension " + std::to_string(x0.size()) +
                              ", coefficients declare " + std::to_string(dim));
    if (!coeffs.drift || !coeffs.qv_drift || !coeffs.diffusion)
        throw ValidationError("forward solve: all three coefficient fields are required");

    NodeProcess x(tree, dim);
    for (int c = 0; c < dim; ++c) x.at(0, 0, c) = x0[static_cast<std::size_t>(c)];

    const auto b = static_cast<std::size_t>(tree.branching());
    const auto d = static_cast<std::size_t>(dim);
    for (int k = 0; k < tree.steps(); ++k) {
        const double t = tree.grid().t(k);
        const double dt = tree.grid().dt(k);
        const auto& cur = x.slice(k);
        auto& next = x.slice(k + 1);
        parallel_for(tree.count(k), [&](std::size_t begin, std::size_t end) {
            std::vector<double> bv(d), hv(d), sv(d);
            for (std::size_t i = begin; i < end; ++i) {
                std::span<const double> xi(cur.data() + i * d, d);
                coeffs.drift(t, xi, bv);
                coeffs.qv_drift(t, xi, hv);
                coeffs.diffusion(t, xi, sv);
                for (std::size_t c = 0; c < d; ++c) {
                    if (!std::isfinite(bv[c]) || !std::isfinite(hv[c]) || !std::isfinite(sv[c]))
                        throw NumericalError("forward solve: non-finite coefficient at step " +
                                             std::to_string(k) + " (t = " + std::to_string(t) +
                                             "), node " + std::to_string(i));
                }
                for (std::size_t br = 0; br < b; ++br) {
                    const double db = tree.delta_b(k, static_cast<int>(br));
                    const double dqv = tree.delta_qv(k, static_cast<int>(br));
                    double* out = next.data() + (i * b + br) * d;
                    for (std::size_t c = 0; c < d; ++c)
                        out[c] = xi[c] + bv[c] * dt + hv[c] * dqv + sv[c] * db;
                }
            }
        });
    }
    return x;
}

namespace {

double field_gap(const VectorField& field, double t, std::span<const double> x,
                 std::span<const double> y, std::vector<double>& fx, std::vector<double>& fy) {
    field(t, x, fx);
    field(t, y, fy);
    double s = 0.0;
    for (std::size_t c = 0; c < fx.size(); ++c) {
        const double d = fx[c] - fy[c];
        s += d * d;
    }
    return std::sqrt(s);
}

double norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

}  // namespace

AssumptionReport check_assumptions(const ForwardCoefficients& coeffs,
                                   const AssumptionCheckConfig& cfg) {
    const Regularity& reg = coeffs.regularity;
    if (!reg.lipschitz && !reg.modulus)
        throw ValidationError(
            "assumption check: declare a Lipschitz constant or modulus data first");
    const bool lipschitz_mode = reg.lipschitz.has_value();
    const auto d = static_cast<std::size_t>(coeffs.dim);

    Rng rng(cfg.seed);
    std::vector<double> x(d), y(d), fx(d), fy(d);
    double worst_b = 0.0, worst_h = 0.0, worst_s = 0.0, worst_sum = 0.0, worst_growth = 0.0;
    const bool has_growth = static_cast<bool>(reg.alpha1) && static_cast<bool>(reg.alpha2);

    for (int it = 0; it < cfg.samples; ++it) {
        const double t = rng.uniform(cfg.t_low, cfg.t_high);
        for (auto& v : x) v = rng.uniform(-cfg.box_halfwidth, cfg.box_halfwidth);
        for (auto& v : y) v = rng.uniform(-cfg.box_halfwidth, cfg.box_halfwidth);
        std::vector<double> dx(d);
        for (std::size_t c = 0; c < d; ++c) dx[c] = x[c] - y[c];
        const double gap = norm(dx);
        if (gap == 0.0) continue;

        const double gb = field_gap(coeffs.drift, t, x, y, fx, fy);
        const double gh = field_gap(coeffs.qv_drift, t, x, y, fx, fy);
        const double gs = field_gap(coeffs.diffusion, t, x, y, fx, fy);

        if (lipschitz_mode) {
            worst_b = std::max(worst_b, gb / gap);
            worst_h = std::max(worst_h, gh / gap);
            worst_s = std::max(worst_s, gs / gap);
        } else {
            const double a = reg.alpha ? reg.alpha(t) : 1.0;
            const double budget = a * a * (*reg.modulus)(gap * gap);
            if (budget > 0.0) {
                worst_b = std::max(worst_b, gb * gb / budget);
                worst_h = std::max(worst_h, gh * gh / budget);
                worst_s = std::max(worst_s, gs * gs / budget);
                worst_sum = std::max(worst_sum, (gb * gb + gh * gh + gs * gs) / budget);
            }
        }

        if (has_growth) {
            coeffs.drift(t, x, fx);
            double sq = 0.0;
            for (double v : fx) sq += v * v;
            coeffs.qv_drift(t, x, fx);
            for (double v : fx) sq += v * v;
            coeffs.diffusion(t, x, fx);
            for (double v : fx) sq += v * v;
            const double a1 = reg.alpha1(t);
            const double a2 = reg.alpha2(t);
            const double cap = a1 * a1 + a2 * a2 * norm(x) * norm(x);
            if (cap > 0.0) worst_growth = std::max(worst_growth, sq / cap);
        }
    }

    AssumptionReport report;
    report.lipschitz_mode = lipschitz_mode;
    const double tol = 1.0 + cfg.slack;
    if (lipschitz_mode) {
        const double c0 = *reg.lipschitz;
        report.entries.push_back({"b", worst_b, worst_b <= c0 * tol});
        report.entries.push_back({"h", worst_h, worst_h <= c0 * tol});
        report.entries.push_back({"sigma", worst_s, worst_s <= c0 * tol});
    } else {
        report.entries.push_back({"b", worst_b, worst_b <= tol});
        report.entries.push_back({"h", worst_h, worst_h <= tol});
        report.entries.push_back({"sigma", worst_s, worst_s <= tol});
        report.entries.push_back({"sum", worst_sum, worst_sum <= tol});
    }
    if (has_growth) report.entries.push_back({"growth", worst_growth, worst_growth <= tol});

    report.pass = true;
    for (const auto& e : report.entries) report.pass = report.pass && e.pass;
    return report;
}

}  // namespace gcalc
