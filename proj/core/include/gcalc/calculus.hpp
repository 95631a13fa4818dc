#pragma once

#include "gcalc/expectation.hpp"
#include "gcalc/process.hpp"

namespace gcalc {

// Forward path accumulations of a piecewise-constant integrand. Values at
// depth k are the partial sums over steps j < k, so depth 0 is 0 and the
// terminal slice carries the full integral.
NodeProcess ito_integral(const SimpleProcess& eta);      // sum xi_j (B_{j+1} - B_j)
NodeProcess bochner_integral(const SimpleProcess& eta);  // sum xi_j dt_j
NodeProcess qv_integral(const SimpleProcess& eta);       // sum xi_j (<B>_{j+1} - <B>_j)

// Left-endpoint discrete norm (sum_{k<N} E[|X_k|^p] dt_k)^(1/p) with the
// Euclidean norm across components; p >= 1.
double mg_norm(const NodeProcess& x, int p);

}  // namespace gcalc
