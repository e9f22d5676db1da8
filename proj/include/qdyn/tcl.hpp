// tcl.hpp — time-local picture: extract time-local generators
// L_{t,t0} = [d/dt Lambda_{t,t0}] Lambda_{t,t0}^{-1} from map families,
// re-integrate them, form propagators V_{t,s} = Lambda_{t,t0} Lambda_{s,t0}^{-1},
// and measure initial-time dependence and composition-law defects.

#pragma once

#include <optional>
#include <vector>

#include "qdyn/grid.hpp"

namespace qdyn {

struct TCLFamily {
    TimeGrid grid;
    int t0_index = 0;
    // Entry j set for j >= t0_index where the inversion succeeded.
    std::vector<std::optional<SuperOp>> values;
    // Condition number of Lambda_{t_j,t0}; 0 below t0_index.
    std::vector<double> condition_log;

    bool complete() const;
    int dim() const;
};

// Generators by column derivative and LU inversion; nodes whose map exceeds
// cond_max are skipped and logged. Throws SingularMap when no node past
// t0_index can be inverted.
TCLFamily extract_tcl(const TwoParamFamily& family, int t0_index, double cond_max = 1e8);

// RK4 integration of d/dt Lambda = L_{t,t0} Lambda along the t0 column with
// the generator linearly interpolated between nodes. Returns a dense family
// with identity diagonal and only the t0 column filled.
TwoParamFamily integrate_tcl(const TCLFamily& tcl);

// V = Lambda_{i,t0} Lambda_{j,t0}^{-1}; throws SingularMap past cond_max.
SuperOp propagator(const TwoParamFamily& family, int i, int j, int t0_index,
                   double cond_max = 1e8);

// max over node triples k <= j <= i of || Lambda_{i,j} Lambda_{j,k} - Lambda_{i,k} ||.
double composition_defect(const TwoParamFamily& family);

} // namespace qdyn
