#include "gcalc/stability.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gcalc/calculus.hpp"
#include "gcalc/errors.hpp"
#include "gcalc/rng.hpp"

namespace gcalc {

namespace {

constexpr double kGenericConstant = 7.0;  // C2: 7-term expansion of the squared gap

void validate_params(const std::vector<double>& params) {
    if (params.empty()) throw ValidationError("stability: empty parameter schedule");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!(params[i] > 0.0))
            throw ValidationError("stability: parameters must be positive");
        if (i > 0 && !(params[i] < params[i - 1]))
            throw ValidationError("stability: parameters must be strictly decreasing");
    }
}

void validate_times(const ScenarioTree& tree, const std::vector<int>& indices) {
    if (indices.empty()) throw ValidationError("stability: no time indices requested");
    for (int k : indices)
        if (k < 0 || k > tree.steps())
            throw ValidationError("stability: time index " + std::to_string(k) +
                                  " outside the grid");
}

// Squared Euclidean gap between two processes on the depth-k slice.
std::vector<double> squared_gap_slice(const NodeProcess& a, const NodeProcess& b, int k) {
    const auto d = static_cast<std::size_t>(a.dim());
    const auto& sa = a.slice(k);
    const auto& sb = b.slice(k);
    std::vector<double> out(sa.size() / d);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double diff = sa[i * d + c] - sb[i * d + c];
            s += diff * diff;
        }
        out[i] = s;
    }
    return out;
}

std::vector<double> abs_gap_slice(const NodeProcess& a, const NodeProcess& b, int k) {
    auto out = squared_gap_slice(a, b, k);
    for (auto& v : out) v = std::sqrt(v);
    return out;
}

bool bound_holds(double gap, double bound) {
    return gap <= bound + 1e-12 * std::max(1.0, bound);
}

StabilitySummary summarize(const std::vector<StabilityRow>& rows, std::size_t n_params,
                           std::size_t n_times, const TimeGrid& grid,
                           const std::vector<int>& time_indices) {
    StabilitySummary s;
    s.monotone = true;
    s.strictly_decreasing = true;
    s.within_bounds = true;
    s.final_over_first = 0.0;
    for (std::size_t ti = 0; ti < n_times; ++ti) {
        const bool positive_time = grid.t(time_indices[ti]) > 0.0;
        double prev = 0.0;
        for (std::size_t pi = 0; pi < n_params; ++pi) {
            const auto& row = rows[pi * n_times + ti];
            if (pi > 0) {
                if (row.gap > prev * (1.0 + 1e-12) + 1e-15) s.monotone = false;
                if (positive_time && !(row.gap < prev)) s.strictly_decreasing = false;
            }
            prev = row.gap;
        }
        const double first = rows[ti].gap;
        const double last = rows[(n_params - 1) * n_times + ti].gap;
        if (first > 0.0) s.final_over_first = std::max(s.final_over_first, last / first);
    }
    for (const auto& row : rows)
        if (row.verdict == "fail") s.within_bounds = false;
    s.pass = s.monotone && s.within_bounds;
    return s;
}

}  // namespace

double bihari_bound(double a, const std::function<double(double)>& beta,
                    const ContinuityModulus& rho, double t, const TimeGrid& grid) {
    if (!(a >= 0.0)) throw ValidationError("comparison bound: negative initial value");
    if (!(t >= 0.0) || t > grid.horizon() * (1.0 + 1e-12) + 1e-300)
        throw ValidationError("comparison bound: time outside [0, horizon]");
    if (!beta) throw ValidationError("comparison bound: empty weight function");
    if (a == 0.0) return 0.0;  // exact: v diverges at 0+

    // Trapezoid on the grid restricted to [0, t].
    double integral = 0.0;
    const auto& nodes = grid.nodes();
    for (std::size_t k = 0; k + 1 < nodes.size() && nodes[k] < t; ++k) {
        const double hi = std::min(nodes[k + 1], t);
        integral += 0.5 * (beta(nodes[k]) + beta(hi)) * (hi - nodes[k]);
    }
    return rho.v_inverse(rho.v(a) + integral);
}

StabilityReport sde_stability_experiment(const ScenarioTree& tree, const SdeFamily& family,
                                         const std::vector<int>& time_indices) {
    validate_params(family.params);
    validate_times(tree, time_indices);
    if (!family.make) throw ValidationError("stability: family generator is empty");

    const SdeProblem base = family.make(0.0);
    const Regularity& reg = base.coeffs.regularity;
    if (!reg.lipschitz && !reg.modulus)
        throw ValidationError("stability: the base problem must declare its regularity");
    const bool lipschitz_mode = reg.lipschitz.has_value();

    auto audit = [](const ForwardCoefficients& coeffs, const std::string& which) {
        const auto report = check_assumptions(coeffs);
        if (!report.pass)
            throw ValidationError("stability: " + which +
                                  " coefficients fail their declared regularity");
    };
    audit(base.coeffs, "base");

    const NodeProcess x_base = solve_forward(tree, base.coeffs, base.x0);
    const auto d = static_cast<std::size_t>(base.coeffs.dim);

    // Weight alpha^2 for the comparison bound: the declared modulus weight,
    // or 3 C0^2 with rho(r) = r in Lipschitz mode (three coefficients).
    const ContinuityModulus bound_rho =
        lipschitz_mode ? ContinuityModulus::linear(1.0) : *reg.modulus;
    auto alpha_sq = [&](double s) {
        if (lipschitz_mode) {
            const double c0 = *reg.lipschitz;
            return 3.0 * c0 * c0;
        }
        return reg.alpha ? reg.alpha(s) * reg.alpha(s) : 1.0;
    };
    auto beta = [&](double s) { return kGenericConstant * alpha_sq(s); };

    std::vector<StabilityRow> rows;
    for (double eps : family.params) {
        const SdeProblem member = family.make(eps);
        if (member.coeffs.dim != base.coeffs.dim || member.x0.size() != base.x0.size())
            throw ValidationError("stability: family member changes the problem dimension");
        audit(member.coeffs, "perturbed");
        const NodeProcess x_eps = solve_forward(tree, member.coeffs, member.x0);

        // Coefficient-gap statistic: C * (sum of squared coefficient gaps
        // integrated along the base solution) + C * |x0 gap|^2.
        double coeff_gap = 0.0;
        {
            std::vector<double> gaps(tree.count(0), 0.0);
            std::vector<double> v0(d), v1(d);
            for (int k = 0; k < tree.steps(); ++k) {
                gaps.assign(tree.count(k), 0.0);
                const double t = tree.grid().t(k);
                const VectorField* base_fields[] = {&base.coeffs.drift, &base.coeffs.qv_drift,
                                                    &base.coeffs.diffusion};
                const VectorField* member_fields[] = {&member.coeffs.drift,
                                                      &member.coeffs.qv_drift,
                                                      &member.coeffs.diffusion};
                for (std::size_t i = 0; i < tree.count(k); ++i) {
                    const auto xi = x_base.vec(k, i);
                    double total = 0.0;
                    for (int fcase = 0; fcase < 3; ++fcase) {
                        (*member_fields[fcase])(t, xi, v1);
                        (*base_fields[fcase])(t, xi, v0);
                        for (std::size_t c = 0; c < d; ++c) {
                            const double diff = v1[c] - v0[c];
                            total += diff * diff;
                        }
                    }
                    gaps[i] = total;
                }
                coeff_gap +=
                    slice_expect(tree, k, gaps, Envelope::upper) * tree.grid().dt(k);
            }
            double x0_gap = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = member.x0[c] - base.x0[c];
                x0_gap += diff * diff;
            }
            coeff_gap = kGenericConstant * (coeff_gap + x0_gap);
        }

        for (int k : time_indices) {
            const auto gaps = squared_gap_slice(x_eps, x_base, k);
            const double gap = slice_expect(tree, k, gaps, Envelope::upper);
            StabilityRow row{eps, tree.grid().t(k), gap, std::nullopt, coeff_gap, "n/a"};
            // The bound is asserted in Lipschitz mode; reported either way.
            const double b = bihari_bound(coeff_gap, beta, bound_rho, tree.grid().t(k),
                                          tree.grid());
            row.bound = b;
            if (lipschitz_mode) row.verdict = bound_holds(gap, b) ? "pass" : "fail";
            rows.push_back(std::move(row));
        }
    }

    StabilityReport report{"sde", std::move(rows), {}, kGenericConstant};
    report.summary = summarize(report.rows, family.params.size(), time_indices.size(),
                               tree.grid(), time_indices);
    return report;
}

StabilityReport bsde_stability_experiment(const ScenarioTree& tree, const BsdeFamily& family,
                                          const std::vector<int>& time_indices,
                                          const BackwardOptions& opts) {
    validate_params(family.params);
    validate_times(tree, time_indices);
    if (!family.make) throw ValidationError("stability: family generator is empty");

    const BsdeProblem base = family.make(0.0);
    const NodeProcess y_base = solve_backward(tree, base.drivers, base.terminal, opts);
    const double sigma_hi = tree.band().sigma_high_sq;
    const double k1 = std::max(1.0, sigma_hi);
    const double lip = base.drivers.lipschitz_f + base.drivers.lipschitz_g;
    const auto d = static_cast<std::size_t>(base.drivers.dim);
    const int n = tree.steps();
    const double horizon = tree.grid().horizon();

    std::vector<StabilityRow> rows;
    for (double delta : family.params) {
        const BsdeProblem member = family.make(delta);
        if (member.drivers.dim != base.drivers.dim)
            throw ValidationError("stability: family member changes the problem dimension");
        const NodeProcess y_delta = solve_backward(tree, member.drivers, member.terminal, opts);

        // Data-gap statistic: E|xi gap| + int E|f gap|(Y0) + sigma_high_sq int E|g gap|(Y0).
        double coeff_gap = 0.0;
        {
            const auto xi_base = base.terminal.leaf_values(tree);
            const auto xi_member = member.terminal.leaf_values(tree);
            std::vector<double> gaps(tree.count(n));
            for (std::size_t i = 0; i < gaps.size(); ++i) {
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double diff = xi_member[i * d + c] - xi_base[i * d + c];
                    s += diff * diff;
                }
                gaps[i] = std::sqrt(s);
            }
            coeff_gap += slice_expect(tree, n, gaps, Envelope::upper);

            std::vector<double> v0(d), v1(d);
            double f_term = 0.0, g_term = 0.0;
            for (int k = 0; k < n; ++k) {
                const double t = tree.grid().t(k);
                std::vector<double> fg(tree.count(k)), gg(tree.count(k));
                for (std::size_t i = 0; i < tree.count(k); ++i) {
                    const auto yi = y_base.vec(k, i);
                    member.drivers.f(t, yi, v1);
                    base.drivers.f(t, yi, v0);
                    double s = 0.0;
                    for (std::size_t c = 0; c < d; ++c) {
                        const double diff = v1[c] - v0[c];
                        s += diff * diff;
                    }
                    fg[i] = std::sqrt(s);
                    member.drivers.g(t, yi, v1);
                    base.drivers.g(t, yi, v0);
                    s = 0.0;
                    for (std::size_t c = 0; c < d; ++c) {
                        const double diff = v1[c] - v0[c];
                        s += diff * diff;
                    }
                    gg[i] = std::sqrt(s);
                }
                f_term += slice_expect(tree, k, fg, Envelope::upper) * tree.grid().dt(k);
                g_term += slice_expect(tree, k, gg, Envelope::upper) * tree.grid().dt(k);
            }
            coeff_gap += f_term + sigma_hi * g_term;
        }

        for (int k : time_indices) {
            const auto gaps = abs_gap_slice(y_delta, y_base, k);
            const double gap = slice_expect(tree, k, gaps, Envelope::upper);
            // Backward comparison bound over the remaining horizon.
            const double tau = horizon - tree.grid().t(k);
            double bound;
            if (lip > 0.0) {
                bound = bihari_bound(coeff_gap, [&](double) { return k1; },
                                     ContinuityModulus::linear(lip), tau, tree.grid());
            } else {
                bound = coeff_gap;  // no driver feedback: the data gap itself
            }
            const std::string verdict = bound_holds(gap, bound) ? "pass" : "fail";
            rows.push_back(StabilityRow{delta, tree.grid().t(k), gap, bound, coeff_gap, verdict});
        }
    }

    StabilityReport report{"bsde", std::move(rows), {}, kGenericConstant};
    report.summary = summarize(report.rows, family.params.size(), time_indices.size(),
                               tree.grid(), time_indices);
    return report;
}

StabilityReport fbsde_stability_experiment(const ScenarioTree& tree, const FbsdeFamily& family,
                                           const std::vector<int>& time_indices,
                                           const FbsdeOptions& opts) {
    validate_params(family.params);
    validate_times(tree, time_indices);
    if (!family.make) throw ValidationError("stability: family generator is empty");

    auto solve = [&](double param) {
        const FbsdeData data = family.make(param);
        const auto check = contraction_check(data.lipschitz_k, tree.grid().horizon());
        if (!check.admissible)
            throw ValidationError("stability: contraction factor " +
                                  std::to_string(check.factor) + " at parameter " +
                                  std::to_string(param) + " is not < 1");
        auto result = solve_fbsde(tree, data, opts);
        if (!result.converged)
            throw NumericalError("stability: picard iteration did not converge at parameter " +
                                 std::to_string(param));
        return std::make_pair(std::move(result), data);
    };

    auto [base_result, base_data] = solve(0.0);
    const int n = tree.steps();

    std::vector<StabilityRow> rows;
    for (double gamma : family.params) {
        auto [member_result, member_data] = solve(gamma);

        // Raw sum of squared data gaps along the base pair; no scaling
        // constant is asserted for the joint experiment.
        double coeff_gap = 0.0;
        {
            const XyCoefficient* base_fields[] = {&base_data.b, &base_data.h, &base_data.sigma,
                                                  &base_data.f, &base_data.g};
            const XyCoefficient* member_fields[] = {&member_data.b, &member_data.h,
                                                    &member_data.sigma, &member_data.f,
                                                    &member_data.g};
            for (int k = 0; k < n; ++k) {
                const double t = tree.grid().t(k);
                std::vector<double> gaps(tree.count(k));
                const auto& xb = base_result.pair.x.slice(k);
                const auto& yb = base_result.pair.y.slice(k);
                for (std::size_t i = 0; i < gaps.size(); ++i) {
                    double total = 0.0;
                    for (int c = 0; c < 5; ++c) {
                        const double diff = (*member_fields[c])(t, xb[i], yb[i]) -
                                            (*base_fields[c])(t, xb[i], yb[i]);
                        total += diff * diff;
                    }
                    gaps[i] = total;
                }
                coeff_gap += slice_expect(tree, k, gaps, Envelope::upper) * tree.grid().dt(k);
            }
            const double x0_gap = member_data.x0 - base_data.x0;
            coeff_gap += x0_gap * x0_gap;
            const auto xi_base = base_data.xi.leaf_values(tree);
            const auto xi_member = member_data.xi.leaf_values(tree);
            std::vector<double> gaps(tree.count(n));
            for (std::size_t i = 0; i < gaps.size(); ++i) {
                const double diff = xi_member[i] - xi_base[i];
                gaps[i] = diff * diff;
            }
            coeff_gap += slice_expect(tree, n, gaps, Envelope::upper);
        }

        for (int k : time_indices) {
            const auto gx = squared_gap_slice(member_result.pair.x, base_result.pair.x, k);
            const auto gy = squared_gap_slice(member_result.pair.y, base_result.pair.y, k);
            std::vector<double> joint(gx.size());
            for (std::size_t i = 0; i < joint.size(); ++i) joint[i] = gx[i] + gy[i];
            const double gap = slice_expect(tree, k, joint, Envelope::upper);
            rows.push_back(
                StabilityRow{gamma, tree.grid().t(k), gap, std::nullopt, coeff_gap, "n/a"});
        }
    }

    StabilityReport report{"fbsde", std::move(rows), {}, kGenericConstant};
    report.summary = summarize(report.rows, family.params.size(), time_indices.size(),
                               tree.grid(), time_indices);
    return report;
}

JensenReport jensen_check(const ScenarioTree& tree, const CylinderFunctional& x,
                          const std::function<double(double)>& rho,
                          const std::vector<int>& depths, double tolerance) {
    if (!rho) throw ValidationError("jensen check: empty transform");
    validate_times(tree, depths);

    // Sampled audit: rho must be nondecreasing and midpoint-concave.
    {
        Rng rng(0x1e5e2ull);
        for (int it = 0; it < 256; ++it) {
            double a = rng.uniform(-8.0, 8.0);
            double b = rng.uniform(-8.0, 8.0);
            if (a > b) std::swap(a, b);
            const double ra = rho(a);
            const double rb = rho(b);
            if (!std::isfinite(ra) || !std::isfinite(rb))
                throw ValidationError("jensen check: transform produced a non-finite value");
            if (rb < ra - 1e-12)
                throw ValidationError("jensen check: transform is not nondecreasing");
            const double mid = rho(0.5 * (a + b));
            if (mid < 0.5 * (ra + rb) - 1e-12)
                throw ValidationError("jensen check: transform is not concave");
        }
    }

    auto leaf = evaluate_on_slice(tree, x);
    std::vector<double> rho_leaf(leaf.size());
    for (std::size_t i = 0; i < leaf.size(); ++i) rho_leaf[i] = rho(leaf[i]);
    const int depth = x.last_index();
    const NodeProcess p = backward_values(tree, depth, std::move(leaf));
    const NodeProcess q = backward_values(tree, depth, std::move(rho_leaf));

    double worst = 0.0;
    bool first = true;
    for (int k : depths) {
        for (std::size_t i = 0; i < tree.count(k); ++i) {
            const double margin = rho(p.at(k, i)) - q.at(k, i);
            if (first || margin < worst) {
                worst = margin;
                first = false;
            }
        }
    }
    return JensenReport{worst, worst >= -tolerance};
}

}  // namespace gcalc
