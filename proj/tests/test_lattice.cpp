#include <doctest.h>

#include <cmath>
#include <vector>

#include "gcalc/errors.hpp"
#include "gcalc/lattice.hpp"

using namespace gcalc;

namespace {

const VolatilityBand kBand{0.5, 1.0};

// Exact binomial value of E[S+] for S = sum of +-sqrt(dt) over n steps,
// via log binomial weights. Independent of the lattice code path.
double binomial_call_oracle(int n, double dt) {
    const double step = std::sqrt(dt);
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double s = step * (2.0 * k - n);
        if (s <= 0.0) continue;
        const double logw = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                            std::lgamma(n - k + 1.0) - n * std::log(2.0);
        acc += std::exp(logw) * s;
    }
    return acc;
}

}  // namespace

TEST_CASE("quadratic payoffs are exact on the lattice") {
    const LatticeSpec spec{TimeGrid::uniform(1.0, 200), kBand, nullptr};
    auto square = [](double x) { return x * x; };
    CHECK(lattice_expect(spec, square, Envelope::upper) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(lattice_expect(spec, square, Envelope::lower) == doctest::Approx(0.5).epsilon(1e-10));

    // affine payoffs are exact too
    auto affine = [](double x) { return 2.0 * x + 3.0; };
    CHECK(lattice_expect(spec, affine, Envelope::upper) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("classical band reduces the lattice to a binomial walk") {
    const int n = 400;
    const VolatilityBand classical{1.0, 1.0};
    const LatticeSpec spec{TimeGrid::uniform(1.0, n), classical, nullptr};
    auto call = [](double x) { return x > 0.0 ? x : 0.0; };
    const double value = lattice_expect(spec, call, Envelope::upper);

    CHECK(value == doctest::Approx(binomial_call_oracle(n, 1.0 / n)).epsilon(1e-9));
    // limit value 1/sqrt(2 pi), discretization error ~ 1/(4n)
    CHECK(std::abs(value - 0.3989422804014327) < 5e-3);
    // upper and lower coincide when the band is a point
    CHECK(lattice_expect(spec, call, Envelope::lower) == doctest::Approx(value).epsilon(1e-12));
}

TEST_CASE("scale function multiplies the terminal state") {
    const LatticeSpec spec{TimeGrid::uniform(1.0, 100), kBand,
                           [](double) { return 2.0; }};
    auto square = [](double x) { return x * x; };
    // var(int 2 dB) = 4 sigma^2 T
    CHECK(lattice_expect(spec, square, Envelope::upper) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(lattice_expect(spec, square, Envelope::lower) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("degenerate band evaluates the payoff at zero") {
    const LatticeSpec spec{TimeGrid::uniform(1.0, 10), VolatilityBand{0.0, 0.0}, nullptr};
    CHECK(lattice_expect(spec, [](double x) { return x + 7.0; }, Envelope::upper) ==
          doctest::Approx(7.0));
}

TEST_CASE("piecewise scale matches a combined single increment") {
    // two independent legs (a then b) against one leg of scale
    // sqrt(a^2 + b^2): the distributions agree, so Lipschitz payoffs match
    // up to lattice discretization error.
    const double a = 2.0, b = 1.0;
    const double combined = std::sqrt(a * a + b * b);
    const LatticeSpec two{TimeGrid::uniform(2.0, 400), kBand,
                          [a, b](double t) { return t < 1.0 ? a : b; }};
    const LatticeSpec one{TimeGrid::uniform(1.0, 200), kBand,
                          [combined](double) { return combined; }};
    auto payoff = [](double x) { return std::tanh(x); };
    for (const Envelope env : {Envelope::upper, Envelope::lower}) {
        CHECK(std::abs(lattice_expect(two, payoff, env) - lattice_expect(one, payoff, env)) <
              1e-2);
    }
}

TEST_CASE("lattice validation") {
    const LatticeSpec spec{TimeGrid::uniform(1.0, 10), kBand, nullptr};
    CHECK_THROWS_AS(lattice_expect(spec, nullptr, Envelope::upper), ValidationError);
    const LatticeSpec bad{TimeGrid::uniform(1.0, 10), kBand, [](double) { return -1.0; }};
    CHECK_THROWS_AS(lattice_expect(bad, [](double x) { return x; }, Envelope::upper),
                    ValidationError);
    // non-finite payoff values are rejected
    CHECK_THROWS_AS(lattice_expect(spec, [](double x) { return std::log(x); }, Envelope::upper),
                    NumericalError);
}
