#include "gcalc/functional.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "gcalc/errors.hpp"
#include "gcalc/rng.hpp"

namespace gcalc {

namespace {

double euclidean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

void audit_growth(const CylinderFunctional::Map& phi, int arity, const GrowthBound& growth,
                  const GrowthAudit& audit) {
    Rng rng(audit.seed);
    std::vector<double> x(static_cast<std::size_t>(arity));
    std::vector<double> y(static_cast<std::size_t>(arity));
    for (int pair = 0; pair < audit.sample_pairs; ++pair) {
        for (auto& v : x) v = rng.uniform(-audit.box_halfwidth, audit.box_halfwidth);
        for (auto& v : y) v = rng.uniform(-audit.box_halfwidth, audit.box_halfwidth);
        const double fx = phi(x);
        const double fy = phi(y);
        if (!std::isfinite(fx) || !std::isfinite(fy))
            throw ValidationError("cylinder functional: non-finite value in the audit box");
        std::vector<double> d(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
        const double nx = euclidean(x);
        const double ny = euclidean(y);
        const double allowed = growth.c *
                               (1.0 + std::pow(nx, growth.m_pow) + std::pow(ny, growth.m_pow)) *
                               euclidean(d);
        if (std::abs(fx - fy) > allowed * (1.0 + audit.slack) + 1e-12)
            throw ValidationError(
                "cylinder functional: sampled increment " + std::to_string(std::abs(fx - fy)) +
                " violates the declared growth bound " + std::to_string(allowed));
    }
}

}  // namespace

CylinderFunctional::CylinderFunctional(std::vector<int> observation_indices, Map phi,
                                       GrowthBound growth, const GrowthAudit& audit)
    : indices_(std::move(observation_indices)), phi_(std::move(phi)), growth_(growth) {
    if (indices_.empty()) throw ValidationError("cylinder functional: no observation indices");
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        if (indices_[i] < 0)
            throw ValidationError("cylinder functional: negative observation index");
        if (i > 0 && indices_[i] <= indices_[i - 1])
            throw ValidationError(
                "cylinder functional: observation indices must be strictly increasing");
    }
    if (!phi_) throw ValidationError("cylinder functional: empty map");
    if (growth_.c < 0.0 || growth_.m_pow < 0)
        throw ValidationError("cylinder functional: malformed growth bound");
    if (audit.enabled) audit_growth(phi_, arity(), growth_, audit);
}

CylinderFunctional CylinderFunctional::of_coordinate(int index, std::function<double(double)> f,
                                                     GrowthBound growth, const GrowthAudit& audit) {
    auto wrapped = [fn = std::move(f)](std::span<const double> coords) { return fn(coords[0]); };
    return CylinderFunctional({index}, std::move(wrapped), growth, audit);
}

double CylinderFunctional::operator()(std::span<const double> coords) const {
    if (static_cast<int>(coords.size()) != arity())
        throw ValidationError("cylinder functional: expected " + std::to_string(arity()) +
                              " coordinates, got " + std::to_string(coords.size()));
    return phi_(coords);
}

}  // namespace gcalc
