// grid.hpp — uniform time grids, one- and two-parameter superoperator
// families, and the convolutions * (homogeneous) and (*) (inhomogeneous)
// by composite trapezoid quadrature.
//
// Quadrature rule: composite trapezoid on the shared grid, summation
// ascending in the tau index. Every cell of a two-parameter convolution is
// computed with exactly the same floating-point expression as the
// corresponding homogeneous convolution entry, so lifting one-parameter
// data to two-parameter form commutes with convolution bitwise.

#pragma once

#include <vector>

#include "qdyn/superop.hpp"

namespace qdyn {

struct TimeGrid {
    double t0 = 0.0;
    double h = 0.0;
    int n = 0; // nodes t_j = t0 + j*h, j = 0..n

    TimeGrid() = default;
    TimeGrid(double t0_, double h_, int n_);

    double node(int j) const { return t0 + j * h; }
    bool operator==(const TimeGrid& o) const { return t0 == o.t0 && h == o.h && n == o.n; }
};

void check_same_grid(const TimeGrid& a, const TimeGrid& b);

// F_j ~ F_{t_j}, t measured from 0.
struct OneParamFamily {
    TimeGrid grid;
    std::vector<SuperOp> values; // n+1 entries

    OneParamFamily() = default;
    OneParamFamily(TimeGrid g, std::vector<SuperOp> v);
    static OneParamFamily constant(const TimeGrid& g, const SuperOp& s);
    static OneParamFamily zero(const TimeGrid& g, int dim);

    int dim() const { return values.empty() ? 0 : values.front().dim; }
};

// S_{i,j} ~ S_{t_i,t_j}, 0 <= j <= i <= n. Two storage modes: dense lower
// triangular, or homogeneous (one value per difference i-j, realizing
// "S_{i,j} = S_{i-j}" without the O(n^2) footprint).
struct TwoParamFamily {
    enum class Storage { dense, homogeneous };

    TimeGrid grid;
    Storage storage = Storage::dense;
    std::vector<SuperOp> values;

    TwoParamFamily() = default;

    static TwoParamFamily dense_zero(const TimeGrid& g, int dim);
    static TwoParamFamily dense_constant(const TimeGrid& g, const SuperOp& s);
    // Evolution-type dense family with identity on the diagonal, zero elsewhere.
    static TwoParamFamily dense_identity_diag(const TimeGrid& g, int dim);
    // Adopt one-parameter values as a homogeneous family on grid g.
    static TwoParamFamily homogeneous(const TimeGrid& g, std::vector<SuperOp> by_difference);
    static TwoParamFamily homogeneous(const OneParamFamily& f);

    int size() const { return static_cast<int>(values.size()); }
    int dim() const { return values.empty() ? 0 : values.front().dim; }
    bool is_homogeneous_storage() const { return storage == Storage::homogeneous; }

    static int tri_index(int i, int j) { return i * (i + 1) / 2 + j; }

    const SuperOp& at(int i, int j) const;
    SuperOp& cell(int i, int j); // dense storage only

    TwoParamFamily& operator+=(const TwoParamFamily& o);
};

// Materialize a homogeneous-storage family as dense triangular storage.
TwoParamFamily densify(const TwoParamFamily& f);

// K_{t,tau} = delta(t - tau) A_t + R_{t,tau}. The delta part is structural,
// never a narrow spike on the grid. `delta` is empty (no delta part) or has
// one coefficient per node.
struct KernelFamily {
    std::vector<SuperOp> delta;
    TwoParamFamily regular;

    bool has_delta() const { return !delta.empty(); }
    const TimeGrid& grid() const { return regular.grid; }
    int dim() const;

    static KernelFamily pure_delta(const TimeGrid& g, std::vector<SuperOp> a, TwoParamFamily::Storage s);
    static KernelFamily pure_delta_constant(const TimeGrid& g, const SuperOp& a, TwoParamFamily::Storage s);
    static KernelFamily pure_regular(TwoParamFamily r);
};

KernelFamily operator-(KernelFamily a, const KernelFamily& b);

// (a * b)_i = trapezoid of int_0^{t_i} a_{t_i - tau} b_tau dtau.
OneParamFamily convolve_hom(const OneParamFamily& a, const OneParamFamily& b);

// (A (*) B)_{i,j} = trapezoid of int_{t_j}^{t_i} A_{t_i,tau} B_{tau,t_j} dtau;
// diagonal cells are zero (empty integral). Homogeneous inputs produce a
// homogeneous result through the shared one-parameter loop.
TwoParamFamily convolve_inhom(const TwoParamFamily& a, const TwoParamFamily& b);

// (K star B)_{i,j} = A_i o B_{i,j} + (R (*) B)_{i,j}.
TwoParamFamily convolve_kernel(const KernelFamily& k, const TwoParamFamily& b);

// (B star K)_{i,j} = B_{i,j} o A_j + (B (*) R)_{i,j}.
TwoParamFamily convolve_kernel_right(const TwoParamFamily& b, const KernelFamily& k);

// max over (i,j) of the 2-norm of ([A(*)B](*)C - A(*)[B(*)C])_{i,j}.
double associativity_defect(const TwoParamFamily& a, const TwoParamFamily& b,
                            const TwoParamFamily& c);

// max over pairs with equal i-j of ||F_{i,j} - F_{i-j,0}||.
double homogeneity_defect(const TwoParamFamily& f);

// d/dt along a column: second-order centered stencil interior, second-order
// one-sided at the column ends. The column must hold at least three nodes.
// Every module uses these stencils so residual budgets stay comparable.
Eigen::MatrixXcd column_derivative(const TwoParamFamily& f, int i, int j);

double sup_norm(const OneParamFamily& f);
double sup_norm(const TwoParamFamily& f);
double sup_diff(const TwoParamFamily& a, const TwoParamFamily& b);

} // namespace qdyn
