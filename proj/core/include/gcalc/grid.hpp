#pragma once

#include <vector>

namespace gcalc {

// Partition 0 = t_0 < t_1 < ... < t_N = T. steps() == N. The degenerate
// single-node grid (N == 0, horizon 0) is accepted.
class TimeGrid {
public:
    static TimeGrid uniform(double horizon, int steps);
    explicit TimeGrid(std::vector<double> nodes);

    int steps() const { return static_cast<int>(nodes_.size()) - 1; }
    double horizon() const { return nodes_.back(); }
    double t(int k) const;
    double dt(int k) const;  // t_{k+1} - t_k
    double mesh() const;     // max_k dt(k)
    const std::vector<double>& nodes() const { return nodes_; }

private:
    std::vector<double> nodes_;
};

}  // namespace gcalc
