#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gcalc {

// Declared regularity |phi(x) - phi(y)| <= c (1 + |x|^m_pow + |y|^m_pow) |x - y|.
struct GrowthBound {
    double c = 0.0;
    int m_pow = 0;
};

struct GrowthAudit {
    int sample_pairs = 64;
    double box_halfwidth = 5.0;
    std::uint64_t seed = 0x5eed5eedull;
    double slack = 1e-9;
    bool enabled = true;
};

// Random variable phi(B_{t_{i_1}}, ..., B_{t_{i_m}}) observed at strictly
// increasing grid indices. These are the only admissible random variables;
// the declared growth bound is spot-checked by sampling at construction and
// a violation throws ValidationError.
class CylinderFunctional {
public:
    using Map = std::function<double(std::span<const double>)>;

    CylinderFunctional(std::vector<int> observation_indices, Map phi, GrowthBound growth,
                       const GrowthAudit& audit = {});

    // phi(B_{t_k}) convenience wrapper.
    static CylinderFunctional of_coordinate(int index, std::function<double(double)> f,
                                            GrowthBound growth, const GrowthAudit& audit = {});

    const std::vector<int>& observation_indices() const { return indices_; }
    int arity() const { return static_cast<int>(indices_.size()); }
    int last_index() const { return indices_.back(); }
    const GrowthBound& growth() const { return growth_; }

    double operator()(std::span<const double> coords) const;

private:
    std::vector<int> indices_;
    Map phi_;
    GrowthBound growth_;
};

}  // namespace gcalc
