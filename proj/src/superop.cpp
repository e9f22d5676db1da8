#include "qdyn/superop.hpp"

#include <unsupported/Eigen/KroneckerProduct>

namespace qdyn {

namespace {

void check_same_dim(const SuperOp& a, const SuperOp& b)
{
    if (a.dim != b.dim) {
        throw DimensionMismatch("superop dimension mismatch: " + std::to_string(a.dim)
                                + " vs " + std::to_string(b.dim));
    }
}

} // namespace

SuperOp::SuperOp(int d, Eigen::MatrixXcd m) : dim(d), mat(std::move(m))
{
    const int dd = dim * dim;
    if (mat.rows() != dd || mat.cols() != dd) {
        throw DimensionMismatch("superop matrix must be d^2 x d^2");
    }
}

SuperOp SuperOp::zero(int d)
{
    return SuperOp(d, Eigen::MatrixXcd::Zero(d * d, d * d));
}

SuperOp SuperOp::identity(int d)
{
    return SuperOp(d, Eigen::MatrixXcd::Identity(d * d, d * d));
}

SuperOp SuperOp::sandwich(const Operator& a, const Operator& b)
{
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
        throw DimensionMismatch("sandwich operators must be square and equal-sized");
    }
    const int d = static_cast<int>(a.rows());
    return SuperOp(d, Eigen::kroneckerProduct(b.transpose(), a));
}

SuperOp SuperOp::left_mult(const Operator& a)
{
    const int d = static_cast<int>(a.rows());
    return sandwich(a, Operator::Identity(d, d));
}

SuperOp SuperOp::right_mult(const Operator& b)
{
    const int d = static_cast<int>(b.rows());
    return sandwich(Operator::Identity(d, d), b);
}

SuperOp& SuperOp::operator+=(const SuperOp& o)
{
    check_same_dim(*this, o);
    mat += o.mat;
    return *this;
}

SuperOp& SuperOp::operator-=(const SuperOp& o)
{
    check_same_dim(*this, o);
    mat -= o.mat;
    return *this;
}

SuperOp& SuperOp::operator*=(double s)
{
    mat *= s;
    return *this;
}

SuperOp operator+(SuperOp a, const SuperOp& b)
{
    a += b;
    return a;
}

SuperOp operator-(SuperOp a, const SuperOp& b)
{
    a -= b;
    return a;
}

SuperOp operator-(const SuperOp& a)
{
    return SuperOp(a.dim, -a.mat);
}

SuperOp operator*(double s, SuperOp a)
{
    a.mat *= s;
    return a;
}

SuperOp operator*(cpx s, SuperOp a)
{
    a.mat *= s;
    return a;
}

SuperOp operator*(const SuperOp& a, const SuperOp& b)
{
    check_same_dim(a, b);
    return SuperOp(a.dim, a.mat * b.mat);
}

Operator apply(const SuperOp& s, const Operator& x)
{
    if (x.rows() != s.dim || x.cols() != s.dim) {
        throw DimensionMismatch("apply: operator dimension does not match superop");
    }
    const int d = s.dim;
    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(x.data(), d * d);
    Eigen::VectorXcd w = s.mat * v;
    return Eigen::Map<const Operator>(w.data(), d, d);
}

SuperOp kraus_to_superop(const std::vector<std::pair<double, Operator>>& terms, int dim)
{
    SuperOp out = SuperOp::zero(dim);
    for (const auto& [w, k] : terms) {
        if (w < 0.0) {
            throw NegativeWeight("kraus weight must be non-negative, got " + std::to_string(w));
        }
        if (k.rows() != dim || k.cols() != dim) {
            throw DimensionMismatch("kraus operator dimension mismatch");
        }
        // K rho K^dag  ->  conj(K) kron K
        out.mat += w * Eigen::kroneckerProduct(k.conjugate(), k).eval();
    }
    return out;
}

Eigen::MatrixXcd choi(const SuperOp& s)
{
    const int d = s.dim;
    Eigen::MatrixXcd c(d * d, d * d);
    // Block (i,j) of C is S(E_ij); S(E_ij)[k,l] = mat[l*d+k, j*d+i].
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            for (int k = 0; k < d; ++k) {
                for (int l = 0; l < d; ++l) {
                    c(i * d + k, j * d + l) = s.mat(l * d + k, j * d + i);
                }
            }
        }
    }
    return c;
}

CpVerdict verdict_cp(const SuperOp& s, double tol, double herm_tol)
{
    Eigen::MatrixXcd c = choi(s);
    Eigen::MatrixXcd anti = 0.5 * (c - c.adjoint());
    CpVerdict v;
    v.herm_defect = spectral_norm(anti);
    if (v.herm_defect > herm_tol) {
        throw NonHermitianChoi("Choi matrix anti-Hermitian defect " + std::to_string(v.herm_defect)
                               + " exceeds " + std::to_string(herm_tol));
    }
    Eigen::MatrixXcd herm = 0.5 * (c + c.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    v.min_eig = es.eigenvalues().minCoeff();
    v.cp = v.min_eig >= -tol;
    return v;
}

TraceVerdict verdict_trace(const SuperOp& s, TraceMode mode, double tol)
{
    const int d = s.dim;
    TraceVerdict v;
    v.defect = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            Operator e = Operator::Zero(d, d);
            e(i, j) = 1.0;
            const cpx tr_out = qdyn::apply(s, e).trace();
            const cpx target = (mode == TraceMode::preserving) ? e.trace() : cpx(0.0);
            v.defect = std::max(v.defect, std::abs(tr_out - target));
        }
    }
    v.ok = v.defect <= tol;
    return v;
}

double spectral_norm(const Eigen::MatrixXcd& m)
{
    if (m.size() == 0) {
        return 0.0;
    }
    return m.jacobiSvd().singularValues()(0);
}

} // namespace qdyn
