// gkls.hpp — GKLS generators from time-dependent coefficient specs, the
// splitting L = Phi - Z, and grid sampling of generator families.

#pragma once

#include <functional>
#include <vector>

#include "qdyn/grid.hpp"
#include "qdyn/superop.hpp"

namespace qdyn {

struct GKLSChannel {
    std::function<double(double)> rate;    // gamma_k(t) >= 0
    std::function<Operator(double)> noise; // L_k(t)
};

// Coefficients are sampled at grid nodes only; interpolation (and its error
// budget) belongs to the convolution and solver modules. The callables must
// be safe for concurrent invocation, or the caller samples single-threaded.
struct GKLSSpec {
    int dim = 0;
    std::function<Operator(double)> hamiltonian; // Hermitian H(t)
    std::vector<GKLSChannel> channels;
    bool time_dependent = false;

    static GKLSSpec constant(const Operator& h,
                             const std::vector<std::pair<double, Operator>>& channels);
};

// L(rho) = -i[H,rho] + sum_k gamma_k (L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho}).
SuperOp build_generator(const GKLSSpec& spec, double t);

struct GeneratorSplit {
    SuperOp phi; // jump part, CP by construction
    SuperOp z;   // Z(rho) = C rho + rho C^dag, C = iH + 1/2 sum gamma_k L_k^dag L_k
};

GeneratorSplit split_generator(const GKLSSpec& spec, double t);

struct GeneratorFamily {
    std::vector<SuperOp> l_nodes;
    std::vector<SuperOp> phi_nodes;
    std::vector<SuperOp> z_nodes;
};

GeneratorFamily sample_family(const GKLSSpec& spec, const TimeGrid& grid);

} // namespace qdyn
