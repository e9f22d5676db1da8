// superop.hpp — operators, superoperators and the CP / trace verdicts.
//
// Vectorization convention (used by every module in this project):
// column stacking, vec(A rho B) = (B^T kron A) vec(rho). Eigen stores
// matrices column-major, so vec(X) is simply a flat view of X.

#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qdyn/errors.hpp"

namespace qdyn {

using cpx = std::complex<double>;
using Operator = Eigen::MatrixXcd; // d x d

// One linear map on operators, stored as a d^2 x d^2 matrix in the
// column-stacking basis.
struct SuperOp {
    int dim = 0;
    Eigen::MatrixXcd mat; // d^2 x d^2

    SuperOp() = default;
    SuperOp(int d, Eigen::MatrixXcd m);

    static SuperOp zero(int d);
    static SuperOp identity(int d);
    // rho -> A rho B
    static SuperOp sandwich(const Operator& a, const Operator& b);
    // rho -> A rho
    static SuperOp left_mult(const Operator& a);
    // rho -> rho B
    static SuperOp right_mult(const Operator& b);

    SuperOp& operator+=(const SuperOp& o);
    SuperOp& operator-=(const SuperOp& o);
    SuperOp& operator*=(double s);
};

SuperOp operator+(SuperOp a, const SuperOp& b);
SuperOp operator-(SuperOp a, const SuperOp& b);
SuperOp operator-(const SuperOp& a);
SuperOp operator*(double s, SuperOp a);
SuperOp operator*(cpx s, SuperOp a);
// Composition: (a * b)(rho) = a(b(rho)).
SuperOp operator*(const SuperOp& a, const SuperOp& b);

Operator apply(const SuperOp& s, const Operator& x);

// Phi(rho) = sum_k w_k K_k rho K_k^dag, completely positive by construction.
SuperOp kraus_to_superop(const std::vector<std::pair<double, Operator>>& terms, int dim);

// C = (id (x) S)(|Omega><Omega|), |Omega> = sum_i |ii> unnormalized.
Eigen::MatrixXcd choi(const SuperOp& s);

struct CpVerdict {
    bool cp = false;
    double min_eig = 0.0;
    double herm_defect = 0.0; // norm of the anti-Hermitian part of the Choi matrix
};

// S is CP iff the (symmetrized) Choi matrix is PSD. Throws NonHermitianChoi
// when the anti-Hermitian defect exceeds herm_tol: quadrature noise must not
// flip a CP verdict silently.
CpVerdict verdict_cp(const SuperOp& s, double tol = 1e-10, double herm_tol = 1e-8);

enum class TraceMode { preserving, annihilating };

struct TraceVerdict {
    bool ok = false;
    double defect = 0.0; // max over the matrix-unit basis
};

TraceVerdict verdict_trace(const SuperOp& s, TraceMode mode, double tol = 1e-10);

// Largest singular value.
double spectral_norm(const Eigen::MatrixXcd& m);

} // namespace qdyn
