#pragma once

#include <functional>
#include <vector>

#include "gcalc/bsde.hpp"
#include "gcalc/process.hpp"

namespace gcalc {

using XyCoefficient = std::function<double(double t, double x, double y)>;

// Scalar coupled forward-backward data on [0, T]. All five coefficients
// share the declared joint Lipschitz constant K in (x, y); solve_fbsde
// spot-checks it by sampling unless the audit is disabled.
struct FbsdeData {
    double x0 = 0.0;
    TerminalData xi;
    XyCoefficient b;      // forward dt
    XyCoefficient h;      // forward d<B>
    XyCoefficient sigma;  // forward dB
    XyCoefficient f;      // backward ds
    XyCoefficient g;      // backward d<B>
    double lipschitz_k = 0.0;
};

struct ProcessPair {
    NodeProcess x;
    NodeProcess y;
};

struct ContractionCheck {
    double factor;  // (2 sqrt 6 + 2 sqrt 2) K sqrt(T)
    bool admissible;
};
ContractionCheck contraction_check(double lipschitz_k, double horizon);

// One application of the Picard operator. Both components read the input
// pair (Jacobi update): the first is the forward Euler accumulation from x0,
// the second a single conditional-expectation sweep from the terminal data.
ProcessPair lambda_map(const ScenarioTree& tree, const FbsdeData& data, const ProcessPair& in);

// Product-space norm |X|_{M^2} + |Y|_{M^2} (sum of square roots), the
// convention used for residuals and contraction ratios. The sum-of-integrals
// alternative (|X|^2 + |Y|^2 summed before the root) is exposed alongside as
// a diagnostic because the two appear interchangeably in the underlying
// estimates.
double product_norm(const ProcessPair& p);
double product_norm_sum_squares(const ProcessPair& p);

struct FbsdeOptions {
    double tol = 1e-10;
    int max_iter = 500;
    bool force = false;         // run despite an inadmissible contraction factor
    bool gauss_seidel = false;  // second component reads the freshly updated first
    bool audit = true;          // sampled check of the declared K
};

struct FbsdeResult {
    ProcessPair pair;
    int iterations;
    std::vector<double> residuals;  // successive Picard increments, product norm
    bool converged;
    bool forced;
    double factor;
    double norm_square_roots;  // final pair, adopted convention
    double norm_sum_squares;   // final pair, diagnostic convention
};

// Picard iteration from the canonical start (X == x0, Y == conditional
// expectation of the terminal data). Refuses inadmissible contraction data
// with ValidationError quoting the factor unless opts.force is set; on
// max_iter exhaustion returns converged == false with the residual history.
FbsdeResult solve_fbsde(const ScenarioTree& tree, const FbsdeData& data,
                        const FbsdeOptions& opts = {});

}  // namespace gcalc
