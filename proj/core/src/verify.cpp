#include "gcalc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gcalc/calculus.hpp"
#include "gcalc/errors.hpp"
#include "gcalc/expectation.hpp"
#include "gcalc/lattice.hpp"
#include "gcalc/modulus.hpp"
#include "gcalc/stability.hpp"

namespace gcalc {

namespace {

// Ridge kinds, all 1-Lipschitz.
double ridge(int kind, double u) {
    switch (kind) {
        case 0: return std::sin(u);
        case 1: return std::tanh(u);
        case 2: return std::abs(u);
        case 3: return u > 0.0 ? u : 0.0;
        case 4: return std::clamp(u, -1.0, 1.0);
        default: return u;
    }
}

CylinderFunctional random_ridge_functional(std::vector<int> indices, Rng& rng) {
    const auto m = indices.size();
    struct Term {
        double c;
        std::vector<double> w;
        double d;
        int kind;
    };
    std::vector<Term> terms(3);
    double lipschitz = 0.0;
    for (auto& term : terms) {
        term.c = rng.uniform(-1.5, 1.5);
        term.w.resize(m);
        double norm_sq = 0.0;
        for (auto& w : term.w) {
            w = rng.uniform(-1.0, 1.0);
            norm_sq += w * w;
        }
        term.d = rng.uniform(-1.0, 1.0);
        term.kind = rng.uniform_int(0, 5);
        lipschitz += std::abs(term.c) * std::sqrt(norm_sq);
    }

    // Occasionally add a quadratic ridge so polynomial growth gets exercised.
    double q = 0.0;
    std::vector<double> wq;
    double wq_norm_sq = 0.0;
    if (rng.uniform() < 0.25) {
        q = rng.uniform(-0.5, 0.5);
        wq.resize(m);
        for (auto& w : wq) {
            w = rng.uniform(-1.0, 1.0);
            wq_norm_sq += w * w;
        }
    }

    GrowthBound growth{lipschitz + std::abs(q) * wq_norm_sq + 1e-9, q == 0.0 ? 0 : 1};
    auto phi = [terms = std::move(terms), q, wq = std::move(wq)](std::span<const double> x) {
        double s = 0.0;
        for (const auto& term : terms) {
            double u = term.d;
            for (std::size_t i = 0; i < x.size(); ++i) u += term.w[i] * x[i];
            s += term.c * ridge(term.kind, u);
        }
        if (q != 0.0) {
            double u = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) u += wq[i] * x[i];
            s += q * u * u;
        }
        return s;
    };
    return CylinderFunctional(std::move(indices), std::move(phi), growth);
}

std::vector<int> random_indices(int lo, int hi, int max_arity, Rng& rng) {
    const int span = hi - lo + 1;
    const int m = std::min(max_arity, span) > 1
                      ? rng.uniform_int(1, std::min(max_arity, span))
                      : 1;
    std::vector<int> indices;
    while (static_cast<int>(indices.size()) < m) {
        const int candidate = rng.uniform_int(lo, hi);
        if (std::find(indices.begin(), indices.end(), candidate) == indices.end())
            indices.push_back(candidate);
    }
    std::sort(indices.begin(), indices.end());
    return indices;
}

// Values of x on the terminal slice (lifted when it observes earlier depths).
std::vector<double> terminal_slice(const ScenarioTree& tree, const CylinderFunctional& x) {
    auto values = evaluate_on_slice(tree, x);
    return lift_to_depth(tree, std::move(values), x.last_index(), tree.steps());
}

}  // namespace

CylinderFunctional random_cylinder_functional(const ScenarioTree& tree, Rng& rng, int max_arity) {
    if (tree.steps() == 0) return random_ridge_functional({0}, rng);
    return random_ridge_functional(random_indices(1, tree.steps(), max_arity, rng), rng);
}

VerifyReport run_verify(const VerifyOptions& opts) {
    VerifyReport report;
    auto add = [&](std::string name, double value, double tolerance) {
        report.rows.push_back(VerifyRow{std::move(name), value, tolerance, value <= tolerance});
    };

    const int n = std::clamp(opts.steps, 1, 6);
    const TimeGrid grid = TimeGrid::uniform(opts.horizon, n);
    const ScenarioTree tree = build_tree(grid, opts.band);
    const std::size_t leaves = tree.count(n);
    Rng rng(opts.seed);

    // Sublinear-expectation axioms over random functional pairs, evaluated
    // on shared terminal slices.
    {
        double mono = 0.0, constant = 0.0, subadd = 0.0, hom = 0.0;
        for (int it = 0; it < opts.random_pairs; ++it) {
            const auto x = terminal_slice(tree, random_cylinder_functional(tree, rng));
            const auto y = terminal_slice(tree, random_cylinder_functional(tree, rng));

            std::vector<double> dominating(leaves), sum(leaves), scaled(leaves);
            const double lambda = rng.uniform(0.0, 3.0);
            for (std::size_t i = 0; i < leaves; ++i) {
                dominating[i] = x[i] + std::abs(y[i]);
                sum[i] = x[i] + y[i];
                scaled[i] = lambda * x[i];
            }
            const double ex = slice_expect(tree, n, x);
            const double ey = slice_expect(tree, n, y);
            mono = std::max(mono, ex - slice_expect(tree, n, dominating));
            const double c = rng.uniform(-2.0, 2.0);
            const std::vector<double> constants(leaves, c);
            constant = std::max(constant, std::abs(slice_expect(tree, n, constants) - c));
            subadd = std::max(subadd, slice_expect(tree, n, sum) - (ex + ey));
            hom = std::max(hom, std::abs(slice_expect(tree, n, scaled) - lambda * ex));
        }
        add("axioms.monotonicity", mono, 1e-12);
        add("axioms.constant_preserving", constant, 1e-12);
        add("axioms.subadditivity", subadd, 1e-12);
        add("axioms.positive_homogeneity", hom, 1e-12);
    }

    // Conditional counterparts: node-wise forms plus measurable pull-out and
    // the tower identity (bit-exact: re-running the same reduction).
    {
        double mono = 0.0, adapted = 0.0, subadd = 0.0, scaling = 0.0, tower = 0.0;
        const int pairs = std::max(opts.random_pairs / 4, 8);
        for (int it = 0; it < pairs; ++it) {
            const int k = rng.uniform_int(1, n - 1 >= 1 ? n - 1 : 1);
            const auto x = terminal_slice(tree, random_cylinder_functional(tree, rng));
            const auto y = terminal_slice(tree, random_cylinder_functional(tree, rng));

            const NodeProcess ex = backward_values(tree, n, x);
            std::vector<double> dominating(leaves), sum(leaves), neg(leaves);
            for (std::size_t i = 0; i < leaves; ++i) {
                dominating[i] = x[i] + std::abs(y[i]);
                sum[i] = x[i] + y[i];
                neg[i] = -x[i];
            }
            const NodeProcess ed = backward_values(tree, n, dominating);
            const NodeProcess ey = backward_values(tree, n, y);
            const NodeProcess es = backward_values(tree, n, sum);
            const NodeProcess eneg = backward_values(tree, n, neg);

            for (std::size_t i = 0; i < tree.count(k); ++i) {
                mono = std::max(mono, ex.at(k, i) - ed.at(k, i));
                subadd = std::max(subadd, es.at(k, i) - (ex.at(k, i) + ey.at(k, i)));
            }

            // Measurable functional: conditioning at its own depth returns it.
            const auto eta_fn = random_ridge_functional(random_indices(1, k, 2, rng), rng);
            auto eta = evaluate_on_slice(tree, eta_fn);
            eta = lift_to_depth(tree, std::move(eta), eta_fn.last_index(), k);
            const NodeProcess eeta = backward_values(tree, k, std::vector<double>(eta));
            for (std::size_t i = 0; i < tree.count(k); ++i)
                adapted = std::max(adapted, std::abs(eeta.at(k, i) - eta[i]));

            // Measurable scaling: E[eta X | k] = eta+ E[X|k] + eta- E[-X|k].
            const auto eta_terminal = lift_to_depth(tree, std::vector<double>(eta), k, n);
            std::vector<double> product(leaves);
            for (std::size_t i = 0; i < leaves; ++i) product[i] = eta_terminal[i] * x[i];
            const NodeProcess ep = backward_values(tree, n, std::move(product));
            for (std::size_t i = 0; i < tree.count(k); ++i) {
                const double pos = std::max(eta[i], 0.0);
                const double negpart = std::max(-eta[i], 0.0);
                const double expected = pos * ex.at(k, i) + negpart * eneg.at(k, i);
                scaling = std::max(scaling, std::abs(ep.at(k, i) - expected));
            }

            // Tower: reduce the slice-s values again and compare at r < s.
            const int s = k;
            const int r = rng.uniform_int(0, s);
            const NodeProcess nested = backward_values(tree, s, std::vector<double>(ex.slice(s)));
            for (std::size_t i = 0; i < tree.count(r); ++i)
                tower = std::max(tower, std::abs(nested.at(r, i) - ex.at(r, i)));
        }
        add("conditional.monotonicity", mono, 1e-12);
        add("conditional.measurable_identity", adapted, 1e-12);
        add("conditional.subadditivity", subadd, 1e-12);
        add("conditional.measurable_scaling", scaling, 1e-12);
        add("conditional.tower_exact", tower, 0.0);
    }

    // Dynamic program vs the recursion oracle on every tractable depth.
    {
        double worst = 0.0;
        for (int depth = 1; depth <= n; ++depth) {
            const ScenarioTree small =
                build_tree(TimeGrid::uniform(opts.horizon * depth / n, depth), opts.band);
            for (int it = 0; it < opts.random_functionals; ++it) {
                const auto f = random_cylinder_functional(small, rng);
                worst = std::max(worst,
                                 std::abs(expect(small, f) - brute_force_expect(small, f)));
            }
        }
        add("oracle.dp_equivalence", worst, 1e-9);
    }

    // Stochastic-integral identities and inequalities over random adapted
    // integrands xi_k = psi(t_k, B_k).
    {
        const double sigma_hi = tree.band().sigma_high_sq;
        double zero_mean = 0.0, isometry = 0.0, variance = 0.0, qv_l1 = 0.0, interchange = 0.0,
               pathwise = 0.0;
        for (int it = 0; it < opts.random_processes; ++it) {
            const auto psi = random_ridge_functional({0}, rng);
            const double t_weight = rng.uniform(-1.0, 1.0);
            const SimpleProcess eta = SimpleProcess::from_fn(
                tree, [&](int k, std::size_t node) {
                    const double b = tree.b_value(k, node);
                    return psi(std::span<const double>(&b, 1)) + t_weight * tree.grid().t(k);
                });

            const NodeProcess ito = ito_integral(eta);
            zero_mean = std::max(zero_mean, std::abs(expect(tree, ito)));
            zero_mean = std::max(zero_mean, std::abs(lower_expect(tree, ito)));

            std::vector<double> ito_sq(leaves);
            const auto& ito_term = ito.slice(n);
            for (std::size_t i = 0; i < leaves; ++i) ito_sq[i] = ito_term[i] * ito_term[i];
            const double e_sq = slice_expect(tree, n, ito_sq);

            const SimpleProcess eta_sq = SimpleProcess::from_fn(
                tree, [&](int k, std::size_t node) {
                    const double v = eta.xi(k, node);
                    return v * v;
                });
            const NodeProcess qv_of_sq = qv_integral(eta_sq);
            isometry = std::max(isometry, std::abs(e_sq - expect(tree, qv_of_sq)));

            double riemann = 0.0;  // sum_k E[xi_k^2] dt_k
            for (int k = 0; k < n; ++k)
                riemann += slice_expect(tree, k, eta_sq.coefficients().slice(k)) *
                           tree.grid().dt(k);
            variance = std::max(variance, e_sq - sigma_hi * riemann);

            const NodeProcess qv_int = qv_integral(eta);
            std::vector<double> qv_abs(leaves);
            const auto& qv_term = qv_int.slice(n);
            for (std::size_t i = 0; i < leaves; ++i) qv_abs[i] = std::abs(qv_term[i]);
            double abs_riemann = 0.0;  // sum_k E[|xi_k|] dt_k
            for (int k = 0; k < n; ++k) {
                std::vector<double> a(tree.count(k));
                for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(eta.xi(k, i));
                abs_riemann += slice_expect(tree, k, a) * tree.grid().dt(k);
            }
            qv_l1 = std::max(qv_l1, slice_expect(tree, n, qv_abs) - sigma_hi * abs_riemann);

            // Expectation/sum interchange for the time integral.
            const NodeProcess dt_int = bochner_integral(eta);
            double sum_of_exp = 0.0;
            for (int k = 0; k < n; ++k)
                sum_of_exp += slice_expect(tree, k, eta.coefficients().slice(k)) *
                              tree.grid().dt(k);
            interchange = std::max(interchange, expect(tree, dt_int) - sum_of_exp);

            // <B> == B^2 - 2 int B dB on every node.
            if (it == 0) {
                const SimpleProcess b_itself = SimpleProcess::from_fn(
                    tree, [&](int k, std::size_t node) { return tree.b_value(k, node); });
                const NodeProcess b_int = ito_integral(b_itself);
                for (int k = 0; k <= n; ++k)
                    for (std::size_t i = 0; i < tree.count(k); ++i) {
                        const double b = tree.b_value(k, i);
                        pathwise = std::max(pathwise, std::abs(tree.qv_value(k, i) -
                                                               (b * b - 2.0 * b_int.at(k, i))));
                    }
            }
        }
        add("ito.zero_mean", zero_mean, 1e-10);
        add("ito.isometry", isometry, 1e-10);
        add("ito.variance_bound", variance, 1e-10);
        add("qv.l1_bound", qv_l1, 1e-10);
        add("integral.interchange", interchange, 1e-10);
        add("qv.pathwise_identity", pathwise, 1e-12);
    }

    // Envelope values on the dense lattice.
    {
        const LatticeSpec spec{TimeGrid::uniform(opts.horizon, opts.lattice_steps), opts.band,
                               nullptr};
        auto square = [](double x) { return x * x; };
        const double upper = lattice_expect(spec, square, Envelope::upper);
        const double lower = lattice_expect(spec, square, Envelope::lower);
        add("envelope.upper", std::abs(upper - opts.band.sigma_high_sq * opts.horizon), 1e-10);
        add("envelope.lower", std::abs(lower - opts.band.sigma_low_sq * opts.horizon), 1e-10);
    }

    // Classical reduction: a collapsed band must reproduce plain averaging
    // and the closed-form first absolute moment.
    {
        const VolatilityBand classical{opts.band.sigma_high_sq, opts.band.sigma_high_sq};
        const ScenarioTree ctree = build_tree(grid, classical);
        double reduction = 0.0;
        for (int it = 0; it < 5; ++it) {
            const auto f = random_cylinder_functional(ctree, rng);
            const auto values = terminal_slice(ctree, f);
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            reduction = std::max(reduction, std::abs(expect(ctree, f) - mean));
            reduction = std::max(reduction, std::abs(lower_expect(ctree, f) - mean));
        }
        add("classical.averaging_reduction", reduction, 1e-12);

        const LatticeSpec spec{TimeGrid::uniform(opts.horizon, opts.lattice_steps), classical,
                               nullptr};
        const double call = lattice_expect(
            spec, [](double x) { return x > 0.0 ? x : 0.0; }, Envelope::upper);
        const double sigma = std::sqrt(classical.sigma_high_sq);
        const double closed = sigma * std::sqrt(opts.horizon) * 0.3989422804014327;
        add("classical.call_value", std::abs(call - closed), 5e-3);
    }

    // Distributional stability: two independent increments against a single
    // increment with the combined scale, for several Lipschitz payoffs.
    {
        const double pairs_ab[][2] = {{1.0, 1.0}, {2.0, 1.0}, {1.0, 3.0}};
        const std::function<double(double)> payoffs[] = {
            [](double x) { return std::sin(x); },
            [](double x) { return std::tanh(x); },
            [](double x) { return std::abs(x); },
            [](double x) { return x > 0.0 ? x : 0.0; },
            [](double x) { return std::clamp(x, -1.0, 1.0); },
            [](double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0); },
            [](double x) { return std::sqrt(1.0 + x * x); },
            [](double x) { return -std::sqrt(1.0 + x * x); },
            [](double x) { return 0.5 * std::sin(2.0 * x); },
            [](double x) { return std::min(x, 1.0); },
        };
        double worst = 0.0;
        for (const auto& ab : pairs_ab) {
            const double a = ab[0], b = ab[1];
            const double combined = std::sqrt(a * a + b * b);
            const LatticeSpec two_inc{TimeGrid::uniform(2.0, 2 * opts.lattice_steps), opts.band,
                                      [a, b](double t) { return t < 1.0 ? a : b; }};
            const LatticeSpec one_inc{TimeGrid::uniform(1.0, opts.lattice_steps), opts.band,
                                      [combined](double) { return combined; }};
            for (const auto& payoff : payoffs) {
                for (const Envelope env : {Envelope::upper, Envelope::lower}) {
                    const double lhs = lattice_expect(two_inc, payoff, env);
                    const double rhs = lattice_expect(one_inc, payoff, env);
                    worst = std::max(worst, std::abs(lhs - rhs));
                }
            }
        }
        add("gnormal.two_increment_stability", worst, 1e-2);
    }

    // Node-wise Jensen for concave nondecreasing transforms.
    {
        std::vector<int> depths(static_cast<std::size_t>(n) + 1);
        for (int k = 0; k <= n; ++k) depths[static_cast<std::size_t>(k)] = k;
        double worst = 0.0;
        for (int it = 0; it < opts.jensen_functionals; ++it) {
            const auto x = random_cylinder_functional(tree, rng);
            const double a = rng.uniform(-1.0, 1.0);
            const double slope = rng.uniform(0.0, 2.0);
            const std::function<double(double)> transforms[] = {
                [a, slope](double u) { return a + slope * u; },
                [](double u) { return 1.0 - std::exp(-u); },
                [](double u) { return u >= 0.0 ? -std::log1p(std::exp(-u))
                                               : u - std::log1p(std::exp(u)); },
            };
            for (const auto& rho : transforms) {
                const auto result = jensen_check(tree, x, rho, depths);
                worst = std::max(worst, -result.worst_margin);
            }
        }
        add("jensen.nodewise", worst, 1e-12);
    }

    // Comparison-bound closed forms: exact zero case and the linear
    // (Gronwall) reproduction against a * exp(c * int beta).
    {
        const TimeGrid qgrid = TimeGrid::uniform(1.0, 200);
        const double zero =
            bihari_bound(0.0, [](double) { return 1.0; }, ContinuityModulus::linear(1.0), 1.0,
                         qgrid);
        add("bihari.zero_case", std::abs(zero), 0.0);

        double worst = 0.0;
        for (int it = 0; it < 20; ++it) {
            const double a = rng.uniform(0.05, 2.0);
            const double c = rng.uniform(0.1, 2.0);
            const double t = rng.uniform(0.1, 1.0);
            const double w0 = rng.uniform(0.0, 2.0);
            const double w1 = rng.uniform(0.0, 2.0);
            auto beta = [w0, w1](double s) { return w0 + w1 * s; };  // trapezoid-exact
            const double bound =
                bihari_bound(a, beta, ContinuityModulus::linear(c), t, qgrid);
            const double integral = w0 * t + 0.5 * w1 * t * t;
            worst = std::max(worst, std::abs(bound - a * std::exp(c * integral)));
        }
        add("bihari.gronwall_reproduction", worst, 1e-6);
    }

    report.pass = true;
    for (const auto& row : report.rows) report.pass = report.pass && row.pass;
    return report;
}

}  // namespace gcalc
