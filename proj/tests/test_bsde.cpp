#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "gcalc/bsde.hpp"
#include "gcalc/errors.hpp"
#include "gcalc/expectation.hpp"
#include "gcalc/sde.hpp"
#include "gcalc/tree.hpp"

using namespace gcalc;

namespace {

const VolatilityBand kBand{0.5, 1.0};

CylinderFunctional terminal_bt(const ScenarioTree& tree) {
    return CylinderFunctional::of_coordinate(
        tree.steps(), [](double x) { return x; }, GrowthBound{1.0, 0});
}

BackwardDrivers zero_drivers() {
    return BackwardDrivers::scalar([](double, double) { return 0.0; },
                                   [](double, double) { return 0.0; }, 0.0, 0.0);
}

}  // namespace

TEST_CASE("vanishing drivers reduce to the conditional expectation of the terminal") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 5), kBand);
    const auto y = solve_backward(tree, zero_drivers(), TerminalData::from_functional(terminal_bt(tree)));
    for (int k = 0; k <= tree.steps(); ++k)
        for (std::size_t i = 0; i < tree.count(k); ++i)
            CHECK(std::abs(y.at(k, i) - tree.b_value(k, i)) < 1e-12);
}

TEST_CASE("constant time driver integrates to the remaining horizon") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(2.0, 5), kBand);
    auto drivers = BackwardDrivers::scalar([](double, double) { return 1.0; },
                                           [](double, double) { return 0.0; }, 0.0, 0.0);
    const auto zero = CylinderFunctional::of_coordinate(
        tree.steps(), [](double) { return 0.0; }, GrowthBound{0.0, 0});
    const auto y = solve_backward(tree, drivers, TerminalData::from_functional(zero));
    for (int k = 0; k <= tree.steps(); ++k)
        for (std::size_t i = 0; i < tree.count(k); ++i)
            CHECK(y.at(k, i) == doctest::Approx(2.0 - tree.grid().t(k)).epsilon(1e-12));
}

TEST_CASE("constant variance driver integrates against the envelope endpoints") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 4), kBand);
    const auto zero = CylinderFunctional::of_coordinate(
        tree.steps(), [](double) { return 0.0; }, GrowthBound{0.0, 0});

    // g = +1: the maximization picks the upper variance at every step.
    auto plus = BackwardDrivers::scalar([](double, double) { return 0.0; },
                                        [](double, double) { return 1.0; }, 0.0, 0.0);
    const auto y_plus = solve_backward(tree, plus, TerminalData::from_functional(zero));
    for (int k = 0; k <= tree.steps(); ++k)
        for (std::size_t i = 0; i < tree.count(k); ++i)
            CHECK(y_plus.at(k, i) ==
                  doctest::Approx(kBand.sigma_high_sq * (1.0 - tree.grid().t(k))).epsilon(1e-12));

    // g = -1: it picks the lower variance.
    auto minus = BackwardDrivers::scalar([](double, double) { return 0.0; },
                                         [](double, double) { return -1.0; }, 0.0, 0.0);
    const auto y_minus = solve_backward(tree, minus, TerminalData::from_functional(zero));
    CHECK(y_minus.at(0, 0) == doctest::Approx(-kBand.sigma_low_sq).epsilon(1e-12));
}

TEST_CASE("linear driver matches the implicit one-step recursion") {
    const double a = 0.4;
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 5), kBand);
    auto drivers = BackwardDrivers::scalar([a](double, double y) { return a * y; },
                                           [](double, double) { return 0.0; }, a, 0.0);
    const auto y = solve_backward(tree, drivers, TerminalData::from_functional(terminal_bt(tree)));

    const int n = tree.steps();
    std::vector<double> manual(y.slice(n));
    for (int k = n - 1; k >= 0; --k) {
        const double dt = tree.grid().dt(k);
        std::vector<double> cur(tree.count(k));
        for (std::size_t i = 0; i < tree.count(k); ++i) {
            double best = -std::numeric_limits<double>::infinity();
            for (int l = 0; l < tree.levels(); ++l) {
                const double m = 0.5 * (manual[tree.child(i, 2 * l)] + manual[tree.child(i, 2 * l + 1)]);
                best = std::max(best, m);
            }
            cur[i] = best / (1.0 - a * dt);  // closed-form per-node fixed point
        }
        for (std::size_t i = 0; i < tree.count(k); ++i)
            CHECK(y.at(k, i) == doctest::Approx(cur[i]).epsilon(1e-10));
        manual = std::move(cur);
    }
}

TEST_CASE("solution satisfies the per-node equation of a nonlinear driver") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 5), kBand);
    auto drivers = BackwardDrivers::scalar([](double, double y) { return std::sin(y); },
                                           [](double, double y) { return 0.25 * std::cos(y); },
                                           1.0, 0.25);
    const auto xi = CylinderFunctional::of_coordinate(
        tree.steps(), [](double x) { return x * x; }, GrowthBound{1.0, 1});
    const auto y = solve_backward(tree, drivers, TerminalData::from_functional(xi));

    for (int k = 0; k < tree.steps(); ++k) {
        const double t = tree.grid().t(k);
        const double dt = tree.grid().dt(k);
        for (std::size_t i = 0; i < tree.count(k); ++i) {
            const double yk = y.at(k, i);
            double best = -std::numeric_limits<double>::infinity();
            for (int l = 0; l < tree.levels(); ++l) {
                const double m =
                    0.5 * (y.at(k + 1, tree.child(i, 2 * l)) + y.at(k + 1, tree.child(i, 2 * l + 1)));
                best = std::max(best, m + std::sin(yk) * dt +
                                          0.25 * std::cos(yk) * tree.vol_levels()[static_cast<std::size_t>(l)] * dt);
            }
            CHECK(std::abs(yk - best) < 1e-11);
        }
    }
}

TEST_CASE("ordered terminals stay ordered throughout the sweep") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 5), kBand);
    auto drivers = BackwardDrivers::scalar([](double, double y) { return 0.3 * y; },
                                           [](double, double) { return 0.0; }, 0.3, 0.0);
    const auto lo = solve_backward(tree, drivers, TerminalData::from_functional(terminal_bt(tree)));
    const auto hi_xi = CylinderFunctional::of_coordinate(
        tree.steps(), [](double x) { return std::abs(x); }, GrowthBound{1.0, 0});
    const auto hi = solve_backward(tree, drivers, TerminalData::from_functional(hi_xi));
    for (int k = 0; k <= tree.steps(); ++k)
        for (std::size_t i = 0; i < tree.count(k); ++i)
            CHECK(hi.at(k, i) >= lo.at(k, i) - 1e-12);
}

TEST_CASE("vector terminals solve componentwise") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 4), kBand);
    BackwardDrivers drivers;
    drivers.dim = 2;
    drivers.f = [](double, std::span<const double>, std::span<double> out) { out[0] = out[1] = 0.0; };
    drivers.g = [](double, std::span<const double>, std::span<double> out) { out[0] = out[1] = 0.0; };

    std::vector<CylinderFunctional> parts;
    parts.push_back(terminal_bt(tree));
    parts.push_back(CylinderFunctional::of_coordinate(
        tree.steps(), [](double x) { return x * x; }, GrowthBound{1.0, 1}));
    const auto y = solve_backward(tree, drivers, TerminalData::from_functionals(std::move(parts)));

    for (int k = 0; k <= tree.steps(); ++k) {
        const double rem = kBand.sigma_high_sq * (1.0 - tree.grid().t(k));
        for (std::size_t i = 0; i < tree.count(k); ++i) {
            const double b = tree.b_value(k, i);
            CHECK(std::abs(y.at(k, i, 0) - b) < 1e-12);
            CHECK(y.at(k, i, 1) == doctest::Approx(b * b + rem).epsilon(1e-12));
        }
    }
}

TEST_CASE("terminal data from a forward solution") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 4), kBand);
    auto coeffs = ForwardCoefficients::scalar([](double, double) { return 0.0; },
                                              [](double, double) { return 0.0; },
                                              [](double, double) { return 1.0; });
    const std::vector<double> x0{0.0};
    const auto x = solve_forward(tree, coeffs, x0);

    const auto y = solve_backward(tree, zero_drivers(), TerminalData::from_process(x));
    for (int k = 0; k <= tree.steps(); ++k)
        for (std::size_t i = 0; i < tree.count(k); ++i)
            CHECK(std::abs(y.at(k, i) - tree.b_value(k, i)) < 1e-12);

    const ScenarioTree other = build_tree(TimeGrid::uniform(1.0, 4), kBand);
    CHECK_THROWS_AS(
        (void)solve_backward(other, zero_drivers(), TerminalData::from_process(x)),
        ValidationError);
}

TEST_CASE("per-step contraction precondition is enforced") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 4), kBand);
    auto drivers = BackwardDrivers::scalar([](double, double y) { return 60.0 * y; },
                                           [](double, double) { return 0.0; }, 60.0, 0.0);
    CHECK_THROWS_AS(
        (void)solve_backward(tree, drivers, TerminalData::from_functional(terminal_bt(tree))),
        ValidationError);
}

TEST_CASE("non-finite driver values raise a numerical error") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 3), kBand);
    auto drivers = BackwardDrivers::scalar(
        [](double, double) { return std::numeric_limits<double>::quiet_NaN(); },
        [](double, double) { return 0.0; }, 0.0, 0.0);
    CHECK_THROWS_AS(
        (void)solve_backward(tree, drivers, TerminalData::from_functional(terminal_bt(tree))),
        NumericalError);
}

TEST_CASE("inner iteration budget is enforced") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 4), kBand);
    auto drivers = BackwardDrivers::scalar([](double, double y) { return 0.4 * y; },
                                           [](double, double) { return 0.0; }, 0.4, 0.0);
    BackwardOptions opts;
    opts.max_inner = 1;
    CHECK_THROWS_AS(
        (void)solve_backward(tree, drivers, TerminalData::from_functional(terminal_bt(tree)), opts),
        NumericalError);
}

TEST_CASE("backward solver validation") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 3), kBand);
    const auto xi = TerminalData::from_functional(terminal_bt(tree));

    BackwardDrivers no_g;
    no_g.dim = 1;
    no_g.f = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    CHECK_THROWS_AS((void)solve_backward(tree, no_g, xi), ValidationError);

    auto negative = zero_drivers();
    negative.lipschitz_f = -1.0;
    CHECK_THROWS_AS((void)solve_backward(tree, negative, xi), ValidationError);

    auto drivers = zero_drivers();
    drivers.dim = 2;
    CHECK_THROWS_AS((void)solve_backward(tree, drivers, xi), ValidationError);

    BackwardOptions bad;
    bad.step_tol = 0.0;
    CHECK_THROWS_AS((void)solve_backward(tree, zero_drivers(), xi, bad), ValidationError);

    CHECK_THROWS_AS((void)TerminalData::from_functionals({}), ValidationError);
}
