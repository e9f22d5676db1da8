// series.hpp — dynamical maps as quantum-jump series. One recursion covers
// all four regimes:
//
//     Lambda^(l) = Lambda^(0) (*) (Phi star Lambda^(l-1)),
//
// where the jump family Phi is a delta-plus-regular kernel: a pure delta
// part turns the star into node-wise composition (semigroup regimes), a
// regular part into the convolution (memory regimes).

#pragma once

#include <optional>
#include <vector>

#include "qdyn/gkls.hpp"
#include "qdyn/grid.hpp"

namespace qdyn {

enum class Regime { semigroup, homogeneous, inhom_semigroup, inhomogeneous };

struct JumpModel {
    Regime regime = Regime::homogeneous;
    TwoParamFamily free;  // Lambda^(0); identity on the diagonal
    KernelFamily jump;    // Phi
    // Memory generator of the free evolution (d/dt Lambda^(0) = -Z (*) Lambda^(0),
    // delta part for semigroup-type free). Needed by the hierarchy residual and
    // the kernel construction; model builders fill it in.
    std::optional<KernelFamily> zgen;
    bool waive_cp_check = false;
};

struct SeriesOptions {
    double tol = 1e-10; // sup-norm truncation threshold on the latest term
    int lmax = 64;
};

struct SeriesResult {
    TwoParamFamily total;
    std::vector<TwoParamFamily> terms; // Lambda^(l), l = 0..L
    double truncation_norm = 0.0;      // sup-norm of the last computed term
    bool converged = false;
};

// Validates the JumpModel invariants: identity diagonal of the free family,
// CP and trace non-increasing free cells, CP jump parts (unless waived).
void validate_model(const JumpModel& model, double cp_tol = 1e-8);

JumpModel build_semigroup_model(const SuperOp& phi, const SuperOp& z, const TimeGrid& grid);
// Free family integrated by RK4 per t0-column from d/dt Lambda^(0) = -Z_t Lambda^(0).
JumpModel build_inhom_semigroup_model(const GKLSSpec& spec, const TimeGrid& grid);

SeriesResult run_series(const JumpModel& model, const SeriesOptions& opt = {});

SeriesResult series_semigroup(const SuperOp& phi, const SuperOp& z, const TimeGrid& grid,
                              const SeriesOptions& opt = {});
SeriesResult series_homogeneous(const JumpModel& model, const SeriesOptions& opt = {});
SeriesResult series_inhom_semigroup(const GKLSSpec& spec, const TimeGrid& grid,
                                    const SeriesOptions& opt = {});
SeriesResult series_inhomogeneous(const JumpModel& model, const SeriesOptions& opt = {});

struct QPResult {
    TwoParamFamily via_q; // Lambda^(0) + Lambda^(0) (*) sum_l Q^{(*)l}
    TwoParamFamily via_p; // Lambda^(0) + (sum_l P^{(*)l}) (*) Lambda^(0)
    bool converged = false;
};

QPResult resum_qp(const JumpModel& model, const SeriesOptions& opt = {});

// Max over l <= L and grid cells of the hierarchy defect
// || d/dt Lambda^(l) + Z star Lambda^(l) - Phi star Lambda^(l-1) ||.
// O(h^2) + O(truncation) for smooth families.
double hierarchy_residual(const SeriesResult& result, const JumpModel& model);

} // namespace qdyn
