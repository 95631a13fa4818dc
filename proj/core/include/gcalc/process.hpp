#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gcalc/tree.hpp"

namespace gcalc {

// Real- or vector-valued process defined on every node of a tree. Node
// indexing makes adaptedness structural: the value at a node is a function
// of that node's root path by construction. The tree is referenced, not
// owned, and must outlive the process; trees are compared by identity.
class NodeProcess {
public:
    explicit NodeProcess(const ScenarioTree& tree, int dim = 1, double fill = 0.0);

    const ScenarioTree& tree() const { return *tree_; }
    int dim() const { return dim_; }

    double& at(int depth, std::size_t node, int comp = 0) {
        return slices_[static_cast<std::size_t>(depth)][node * static_cast<std::size_t>(dim_) +
                                                        static_cast<std::size_t>(comp)];
    }
    double at(int depth, std::size_t node, int comp = 0) const {
        return slices_[static_cast<std::size_t>(depth)][node * static_cast<std::size_t>(dim_) +
                                                        static_cast<std::size_t>(comp)];
    }
    std::span<double> vec(int depth, std::size_t node);
    std::span<const double> vec(int depth, std::size_t node) const;

    std::vector<double>& slice(int depth) { return slices_[static_cast<std::size_t>(depth)]; }
    const std::vector<double>& slice(int depth) const {
        return slices_[static_cast<std::size_t>(depth)];
    }

private:
    const ScenarioTree* tree_;
    int dim_;
    std::vector<std::vector<double>> slices_;
};

// Node-wise difference a - b; same tree (by identity) and dimension required.
NodeProcess difference(const NodeProcess& a, const NodeProcess& b);

// Piecewise-constant integrand eta_t = sum_k xi_k 1_{[t_k, t_{k+1})} with
// xi_k read from an adapted scalar coefficient process at depth k (k < N).
class SimpleProcess {
public:
    explicit SimpleProcess(NodeProcess coefficients);

    static SimpleProcess constant(const ScenarioTree& tree, double value);
    // Builds coefficients from fn(depth, node), evaluated for depths < N.
    static SimpleProcess from_fn(const ScenarioTree& tree,
                                 const std::function<double(int, std::size_t)>& fn);

    const ScenarioTree& tree() const { return coeffs_.tree(); }
    const NodeProcess& coefficients() const { return coeffs_; }
    double xi(int depth, std::size_t node) const { return coeffs_.at(depth, node); }

private:
    NodeProcess coeffs_;
};

}  // namespace gcalc
