#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gcalc/bsde.hpp"
#include "gcalc/fbsde.hpp"
#include "gcalc/modulus.hpp"
#include "gcalc/sde.hpp"

namespace gcalc {

struct SdeProblem {
    ForwardCoefficients coeffs;
    std::vector<double> x0;
};

struct BsdeProblem {
    BackwardDrivers drivers;
    TerminalData terminal;
};

// Perturbation family: make(param) yields the problem data, make(0) must
// reproduce the base data exactly. params must be strictly decreasing and
// positive; the base regularity declaration is the common one every member
// is audited against.
struct SdeFamily {
    std::vector<double> params;
    std::function<SdeProblem(double)> make;
};

struct BsdeFamily {
    std::vector<double> params;
    std::function<BsdeProblem(double)> make;
};

struct FbsdeFamily {
    std::vector<double> params;
    std::function<FbsdeData(double)> make;
};

struct StabilityRow {
    double param;
    double t;
    double gap;                   // squared L2 gap (L1 for the backward experiment)
    std::optional<double> bound;  // comparison bound when one is asserted
    double coeff_gap;             // coefficient/data gap statistic for this param
    std::string verdict;          // "pass" | "fail" | "n/a"
};

struct StabilitySummary {
    bool monotone = false;            // gaps nonincreasing along the schedule at every t
    bool strictly_decreasing = false;  // strict at every t > 0
    double final_over_first = 0.0;    // worst ratio across requested times
    bool within_bounds = true;
    bool pass = false;
};

struct StabilityReport {
    std::string experiment;  // "sde" | "bsde" | "fbsde"
    std::vector<StabilityRow> rows;  // ordered by param (schedule order), then t
    StabilitySummary summary;
    double generic_constant = 7.0;  // C used to assemble coefficient gaps
};

// Solves base and perturbed systems on one shared tree, reports squared L2
// gaps E[|X^eps_t - X^0_t|^2] at the requested grid indices together with
// the coefficient-gap statistic and, in Lipschitz mode, the comparison
// (Gronwall) bound. Audits every member against the base declaration first.
StabilityReport sde_stability_experiment(const ScenarioTree& tree, const SdeFamily& family,
                                         const std::vector<int>& time_indices);

// L1 gaps E[|Y^delta_t - Y^0_t|] with the data-gap statistic assembled from
// the terminal and driver differences along the base solution.
StabilityReport bsde_stability_experiment(const ScenarioTree& tree, const BsdeFamily& family,
                                          const std::vector<int>& time_indices,
                                          const BackwardOptions& opts = {});

// Joint gaps E[|X gap|^2 + |Y gap|^2]. Every member must pass
// contraction_check; no closed-form bound is asserted (the bound column
// stays empty) and coeff_gap carries the raw sum of squared data gaps.
StabilityReport fbsde_stability_experiment(const ScenarioTree& tree, const FbsdeFamily& family,
                                           const std::vector<int>& time_indices,
                                           const FbsdeOptions& opts = {});

// Comparison bound u(t) <= v_inverse(v(a) + int_0^t beta(s) ds), exactly 0
// when a == 0. The integral uses the trapezoid rule on the grid restricted
// to [0, t]; out-of-range inversion raises NumericalError rather than
// clipping.
double bihari_bound(double a, const std::function<double(double)>& beta,
                    const ContinuityModulus& rho, double t, const TimeGrid& grid);

struct JensenReport {
    double worst_margin;  // min over checked nodes of rho(E[X|.]) - E[rho(X)|.]
    bool pass;
};

// Node-wise Jensen inequality E[rho(X)|.] <= rho(E[X|.]) for concave
// nondecreasing rho (audited by sampling; ValidationError on violation).
JensenReport jensen_check(const ScenarioTree& tree, const CylinderFunctional& x,
                          const std::function<double(double)>& rho,
                          const std::vector<int>& depths, double tolerance = 1e-12);

}  // namespace gcalc
