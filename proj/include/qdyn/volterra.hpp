// volterra.hpp — memory-kernel master equations on the grid: the Volterra
// integro-differential solver, kernel construction and extraction, the
// derived-kernel ("new ME") residual, and the Laplace-domain resolvent check.

#pragma once

#include <vector>

#include "qdyn/grid.hpp"
#include "qdyn/series.hpp"

namespace qdyn {

// Explicit-Euler predictor, trapezoid corrector; the delta part of the
// kernel is handled semi-implicitly in the corrector (solve on the new node).
struct VolterraScheme {
    int corrector_iterations = 2;
};

// K = Phi - Z, componentwise in delta and regular parts.
KernelFamily kernel_from_pair(const KernelFamily& phi, const KernelFamily& z);
// Convenience: K from a jump model carrying its Z family.
KernelFamily kernel_from_model(const JumpModel& model);

// Solve d/dt Lambda_{t,t0} = A_t Lambda_{t,t0} + int_{t0}^t R_{t,tau} Lambda_{tau,t0} dtau
// per t0-column, Lambda_{t0,t0} = id. Global order h^2. Homogeneous kernels
// produce a homogeneous solution through the single-column path.
TwoParamFamily solve_volterra(const KernelFamily& k, const TimeGrid& grid,
                              const VolterraScheme& scheme = {});

// Recover Z from a free evolution via d/dt Lambda^(0) = -Z (*) Lambda^(0):
// the delta part from the diagonal right-derivative, the regular part by
// stepwise triangular deconvolution of the trapezoid discretization. The
// regular diagonal R_{t,t} is fixed from the second diagonal derivative
// (R = A^2 - A' - d2/dt2 Lambda^(0)|_diag); entries whose stencils do not
// fit near the top of the grid are second-order extrapolated.
KernelFamily z_from_free(const TwoParamFamily& free, double cond_max = 1e8);

// Residual of the reconvolution relation d/dt F + A F + R (*) F = 0 over
// columns with at least three nodes (same stencils as the extraction).
double reconvolution_residual(const TwoParamFamily& free, const KernelFamily& z);

// Residual of d/dt Lambda = KK (*) Lambda + d/dt Lambda^(0) with the derived
// kernel KK = d/dt [free (*) phi]. O(h^2) + O(truncation).
double new_me_residual(const TwoParamFamily& lambda, const TwoParamFamily& free,
                       const TwoParamFamily& phi);

// || (s + Zt_s - Phit_s) Lambdat_s - id || per Laplace point s, with the
// transforms taken by trapezoid quadrature on the grid (delta parts
// transform to constants). Homogeneous regimes only.
std::vector<double> laplace_check(const SeriesResult& result, const JumpModel& model,
                                  const std::vector<double>& s_values,
                                  double tail_tol = 1e-8);

} // namespace qdyn
