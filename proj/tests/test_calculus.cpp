#include <doctest.h>

#include <cmath>
#include <vector>

#include "gcalc/calculus.hpp"
#include "gcalc/errors.hpp"
#include "gcalc/expectation.hpp"

using namespace gcalc;

namespace {

const VolatilityBand kBand{0.5, 1.0};

}  // namespace

TEST_CASE("integrating 1 against the driver reproduces the driver") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 5), kBand);
    const SimpleProcess one = SimpleProcess::constant(tree, 1.0);
    const NodeProcess ito = ito_integral(one);
    const NodeProcess qv = qv_integral(one);
    const NodeProcess dt = bochner_integral(one);
    for (int k = 0; k <= tree.steps(); ++k) {
        for (std::size_t i = 0; i < tree.count(k); ++i) {
            CHECK(ito.at(k, i) == doctest::Approx(tree.b_value(k, i)).epsilon(1e-14));
            CHECK(qv.at(k, i) == doctest::Approx(tree.qv_value(k, i)).epsilon(1e-14));
            CHECK(dt.at(k, i) == doctest::Approx(tree.grid().t(k)).epsilon(1e-14));
        }
    }
}

TEST_CASE("stochastic integrals of adapted integrands have zero mean") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 5), kBand);
    const SimpleProcess eta = SimpleProcess::from_fn(
        tree, [&](int k, std::size_t node) {
            return std::tanh(tree.b_value(k, node)) + 0.3 * tree.grid().t(k);
        });
    const NodeProcess ito = ito_integral(eta);
    CHECK(std::abs(expect(tree, ito)) < 1e-12);
    CHECK(std::abs(lower_expect(tree, ito)) < 1e-12);
}

TEST_CASE("integral of the squared integrand against qv gives the isometry") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 5), kBand);
    const SimpleProcess eta = SimpleProcess::from_fn(
        tree, [&](int k, std::size_t node) {
            return std::sin(2.0 * tree.b_value(k, node)) + 0.5;
        });
    const NodeProcess ito = ito_integral(eta);
    const int n = tree.steps();
    std::vector<double> squared(tree.count(n));
    for (std::size_t i = 0; i < squared.size(); ++i) {
        const double v = ito.at(n, i);
        squared[i] = v * v;
    }
    const SimpleProcess eta_sq = SimpleProcess::from_fn(
        tree, [&](int k, std::size_t node) {
            const double v = eta.xi(k, node);
            return v * v;
        });
    CHECK(slice_expect(tree, n, squared) ==
          doctest::Approx(expect(tree, qv_integral(eta_sq))).epsilon(1e-12));
}

TEST_CASE("variance and first-moment bounds against riemann sums") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 5), kBand);
    const SimpleProcess eta = SimpleProcess::from_fn(
        tree, [&](int k, std::size_t node) {
            return std::cos(tree.b_value(k, node)) - 0.4;
        });
    const int n = tree.steps();

    // E[(int eta dB)^2] <= sigma_high_sq * sum E[eta_k^2] dt
    const NodeProcess ito = ito_integral(eta);
    std::vector<double> squared(tree.count(n));
    for (std::size_t i = 0; i < squared.size(); ++i)
        squared[i] = ito.at(n, i) * ito.at(n, i);
    double riemann_sq = 0.0;
    for (int k = 0; k < n; ++k) {
        std::vector<double> s(tree.count(k));
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = eta.xi(k, i) * eta.xi(k, i);
        riemann_sq += slice_expect(tree, k, s) * tree.grid().dt(k);
    }
    CHECK(slice_expect(tree, n, squared) <= kBand.sigma_high_sq * riemann_sq + 1e-12);

    // E[|int eta d<B>|] <= sigma_high_sq * sum E[|eta_k|] dt
    const NodeProcess qv = qv_integral(eta);
    std::vector<double> abs_term(tree.count(n));
    for (std::size_t i = 0; i < abs_term.size(); ++i) abs_term[i] = std::abs(qv.at(n, i));
    double riemann_abs = 0.0;
    for (int k = 0; k < n; ++k) {
        std::vector<double> s(tree.count(k));
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::abs(eta.xi(k, i));
        riemann_abs += slice_expect(tree, k, s) * tree.grid().dt(k);
    }
    CHECK(slice_expect(tree, n, abs_term) <= kBand.sigma_high_sq * riemann_abs + 1e-12);
}

TEST_CASE("driver norm has a closed form") {
    const double horizon = 1.0;
    const int n = 8;
    const ScenarioTree tree = build_tree(TimeGrid::uniform(horizon, n), kBand);
    const SimpleProcess b = SimpleProcess::from_fn(
        tree, [&](int k, std::size_t node) { return tree.b_value(k, node); });
    // sum_{k<N} E[B_k^2] dt = sigma_high_sq T^2 (N-1) / (2N)
    const double want =
        std::sqrt(kBand.sigma_high_sq * horizon * horizon * (n - 1) / (2.0 * n));
    const NodeProcess driver(b.coefficients());
    CHECK(mg_norm(driver, 2) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("norm of a constant process") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(2.0, 4), kBand);
    NodeProcess x(tree, 1, -3.0);
    CHECK(mg_norm(x, 2) == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(mg_norm(x, 4) == doctest::Approx(3.0 * std::pow(2.0, 0.25)).epsilon(1e-12));
    CHECK_THROWS_AS(mg_norm(x, 0), ValidationError);
}

TEST_CASE("pathwise quadratic variation identity") {
    const ScenarioTree tree = build_tree(TimeGrid::uniform(1.0, 4), kBand);
    const SimpleProcess b = SimpleProcess::from_fn(
        tree, [&](int k, std::size_t node) { return tree.b_value(k, node); });
    const NodeProcess b_db = ito_integral(b);
    for (int k = 0; k <= tree.steps(); ++k) {
        for (std::size_t i = 0; i < tree.count(k); ++i) {
            const double bv = tree.b_value(k, i);
            CHECK(std::abs(tree.qv_value(k, i) - (bv * bv - 2.0 * b_db.at(k, i))) < 1e-12);
        }
    }
}
