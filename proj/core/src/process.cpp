#include "gcalc/process.hpp"

#include <string>

#include "gcalc/errors.hpp"

namespace gcalc {

NodeProcess::NodeProcess(const ScenarioTree& tree, int dim, double fill)
    : tree_(&tree), dim_(dim) {
    if (dim < 1) throw ValidationError("node process: dimension must be >= 1");
    slices_.resize(static_cast<std::size_t>(tree.steps()) + 1);
    for (int k = 0; k <= tree.steps(); ++k)
        slices_[static_cast<std::size_t>(k)]
            .assign(tree.count(k) * static_cast<std::size_t>(dim), fill);
}

std::span<double> NodeProcess::vec(int depth, std::size_t node) {
    auto& s = slices_[static_cast<std::size_t>(depth)];
    return {s.data() + node * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
}

std::span<const double> NodeProcess::vec(int depth, std::size_t node) const {
    const auto& s = slices_[static_cast<std::size_t>(depth)];
    return {s.data() + node * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
}

NodeProcess difference(const NodeProcess& a, const NodeProcess& b) {
    if (&a.tree() != &b.tree())
        throw ValidationError("node process: operands live on different trees");
    if (a.dim() != b.dim())
        throw ValidationError("node process: dimension mismatch, " + std::to_string(a.dim()) +
                              " vs " + std::to_string(b.dim()));
    NodeProcess out(a.tree(), a.dim());
    for (int k = 0; k <= a.tree().steps(); ++k) {
        auto& dst = out.slice(k);
        const auto& sa = a.slice(k);
        const auto& sb = b.slice(k);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = sa[i] - sb[i];
    }
    return out;
}

SimpleProcess::SimpleProcess(NodeProcess coefficients) : coeffs_(std::move(coefficients)) {
    if (coeffs_.dim() != 1)
        throw ValidationError("simple process: integrands are scalar (dim 1)");
}

SimpleProcess SimpleProcess::constant(const ScenarioTree& tree, double value) {
    return SimpleProcess(NodeProcess(tree, 1, value));
}

SimpleProcess SimpleProcess::from_fn(const ScenarioTree& tree,
                                     const std::function<double(int, std::size_t)>& fn) {
    NodeProcess coeffs(tree, 1, 0.0);
    for (int k = 0; k < tree.steps(); ++k)
        for (std::size_t i = 0; i < tree.count(k); ++i) coeffs.at(k, i) = fn(k, i);
    return SimpleProcess(std::move(coeffs));
}

}  // namespace gcalc
