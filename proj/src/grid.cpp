#include "qdyn/grid.hpp"

#include <cmath>

namespace qdyn {

TimeGrid::TimeGrid(double t0_, double h_, int n_) : t0(t0_), h(h_), n(n_)
{
    if (h <= 0.0) {
        throw Error("time grid step must be positive");
    }
    if (n < 0) {
        throw Error("time grid step count must be non-negative");
    }
}

void check_same_grid(const TimeGrid& a, const TimeGrid& b)
{
    if (!(a == b)) {
        throw GridMismatch("time grids differ");
    }
}

OneParamFamily::OneParamFamily(TimeGrid g, std::vector<SuperOp> v)
    : grid(g), values(std::move(v))
{
    if (static_cast<int>(values.size()) != grid.n + 1) {
        throw Error("one-parameter family must hold n+1 values");
    }
}

OneParamFamily OneParamFamily::constant(const TimeGrid& g, const SuperOp& s)
{
    return OneParamFamily(g, std::vector<SuperOp>(g.n + 1, s));
}

OneParamFamily OneParamFamily::zero(const TimeGrid& g, int dim)
{
    return constant(g, SuperOp::zero(dim));
}

TwoParamFamily TwoParamFamily::dense_zero(const TimeGrid& g, int dim)
{
    return dense_constant(g, SuperOp::zero(dim));
}

TwoParamFamily TwoParamFamily::dense_constant(const TimeGrid& g, const SuperOp& s)
{
    TwoParamFamily f;
    f.grid = g;
    f.storage = Storage::dense;
    f.values.assign((g.n + 1) * (g.n + 2) / 2, s);
    return f;
}

TwoParamFamily TwoParamFamily::dense_identity_diag(const TimeGrid& g, int dim)
{
    TwoParamFamily f = dense_zero(g, dim);
    for (int i = 0; i <= g.n; ++i) {
        f.cell(i, i) = SuperOp::identity(dim);
    }
    return f;
}

TwoParamFamily TwoParamFamily::homogeneous(const TimeGrid& g, std::vector<SuperOp> by_difference)
{
    if (static_cast<int>(by_difference.size()) != g.n + 1) {
        throw Error("homogeneous family must hold n+1 values");
    }
    TwoParamFamily f;
    f.grid = g;
    f.storage = Storage::homogeneous;
    f.values = std::move(by_difference);
    return f;
}

TwoParamFamily TwoParamFamily::homogeneous(const OneParamFamily& f)
{
    return homogeneous(f.grid, f.values);
}

const SuperOp& TwoParamFamily::at(int i, int j) const
{
    if (j < 0 || j > i || i > grid.n) {
        throw Error("two-parameter family index out of range");
    }
    return storage == Storage::homogeneous ? values[i - j] : values[tri_index(i, j)];
}

SuperOp& TwoParamFamily::cell(int i, int j)
{
    if (storage != Storage::dense) {
        throw Error("cell() requires dense storage");
    }
    if (j < 0 || j > i || i > grid.n) {
        throw Error("two-parameter family index out of range");
    }
    return values[tri_index(i, j)];
}

TwoParamFamily& TwoParamFamily::operator+=(const TwoParamFamily& o)
{
    check_same_grid(grid, o.grid);
    if (storage != o.storage) {
        throw Error("cannot add families with different storage modes");
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
        values[k] += o.values[k];
    }
    return *this;
}

TwoParamFamily densify(const TwoParamFamily& f)
{
    if (f.storage == TwoParamFamily::Storage::dense) {
        return f;
    }
    TwoParamFamily out;
    out.grid = f.grid;
    out.storage = TwoParamFamily::Storage::dense;
    out.values.reserve((f.grid.n + 1) * (f.grid.n + 2) / 2);
    for (int i = 0; i <= f.grid.n; ++i) {
        for (int j = 0; j <= i; ++j) {
            out.values.push_back(f.values[i - j]);
        }
    }
    return out;
}

int KernelFamily::dim() const
{
    if (!delta.empty()) {
        return delta.front().dim;
    }
    return regular.dim();
}

KernelFamily KernelFamily::pure_delta(const TimeGrid& g, std::vector<SuperOp> a,
                                      TwoParamFamily::Storage s)
{
    if (static_cast<int>(a.size()) != g.n + 1) {
        throw Error("delta part must hold one coefficient per node");
    }
    KernelFamily k;
    const int d = a.front().dim;
    k.delta = std::move(a);
    k.regular = (s == TwoParamFamily::Storage::dense)
                    ? TwoParamFamily::dense_zero(g, d)
                    : TwoParamFamily::homogeneous(g, std::vector<SuperOp>(g.n + 1, SuperOp::zero(d)));
    return k;
}

KernelFamily KernelFamily::pure_delta_constant(const TimeGrid& g, const SuperOp& a,
                                               TwoParamFamily::Storage s)
{
    return pure_delta(g, std::vector<SuperOp>(g.n + 1, a), s);
}

KernelFamily KernelFamily::pure_regular(TwoParamFamily r)
{
    KernelFamily k;
    k.regular = std::move(r);
    return k;
}

KernelFamily operator-(KernelFamily a, const KernelFamily& b)
{
    check_same_grid(a.grid(), b.grid());
    const int d = a.dim();
    if (b.has_delta()) {
        if (!a.has_delta()) {
            a.delta.assign(a.grid().n + 1, SuperOp::zero(d));
        }
        for (std::size_t j = 0; j < a.delta.size(); ++j) {
            a.delta[j] -= b.delta[j];
        }
    }
    if (a.regular.storage != b.regular.storage) {
        throw Error("kernel regular parts must share storage mode");
    }
    for (std::size_t k = 0; k < a.regular.values.size(); ++k) {
        a.regular.values[k] -= b.regular.values[k];
    }
    return a;
}

OneParamFamily convolve_hom(const OneParamFamily& a, const OneParamFamily& b)
{
    check_same_grid(a.grid, b.grid);
    const int n = a.grid.n;
    const int dd = a.dim() * a.dim();
    const double h = a.grid.h;
    std::vector<SuperOp> out;
    out.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        if (i == 0) {
            out.push_back(SuperOp(a.dim(), Eigen::MatrixXcd::Zero(dd, dd)));
            continue;
        }
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dd, dd);
        for (int m = 0; m <= i; ++m) {
            const double w = (m == 0 || m == i) ? 0.5 : 1.0;
            const Eigen::MatrixXcd prod = (a.values[i - m].mat * b.values[m].mat).eval();
            acc += w * prod;
        }
        out.push_back(SuperOp(a.dim(), (h * acc).eval()));
    }
    return OneParamFamily(a.grid, std::move(out));
}

TwoParamFamily convolve_inhom(const TwoParamFamily& a, const TwoParamFamily& b)
{
    check_same_grid(a.grid, b.grid);
    if (a.is_homogeneous_storage() && b.is_homogeneous_storage()) {
        // The change of variables tau -> tau - t_j maps (*) onto * over the
        // same quadrature nodes, so the one-parameter loop is exact here.
        OneParamFamily ah(TimeGrid(0.0, a.grid.h, a.grid.n), a.values);
        OneParamFamily bh(ah.grid, b.values);
        return TwoParamFamily::homogeneous(a.grid, convolve_hom(ah, bh).values);
    }
    const TwoParamFamily& ad = a;
    const TwoParamFamily& bd = b;
    const int n = a.grid.n;
    const int dim = a.dim();
    const int dd = dim * dim;
    const double h = a.grid.h;
    TwoParamFamily out = TwoParamFamily::dense_zero(a.grid, dim);
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const int len = i - j;
            if (len == 0) {
                continue;
            }
            Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dd, dd);
            for (int k = j; k <= i; ++k) {
                const int m = k - j;
                const double w = (m == 0 || m == len) ? 0.5 : 1.0;
                const Eigen::MatrixXcd prod = (ad.at(i, k).mat * bd.at(k, j).mat).eval();
                acc += w * prod;
            }
            out.cell(i, j).mat = (h * acc).eval();
        }
    }
    return out;
}

namespace {

bool delta_all_equal(const std::vector<SuperOp>& d)
{
    for (std::size_t j = 1; j < d.size(); ++j) {
        if (d[j].mat != d[0].mat) {
            return false;
        }
    }
    return true;
}

} // namespace

TwoParamFamily convolve_kernel(const KernelFamily& k, const TwoParamFamily& b)
{
    check_same_grid(k.grid(), b.grid);
    const bool hom_path = k.regular.is_homogeneous_storage() && b.is_homogeneous_storage()
                          && (!k.has_delta() || delta_all_equal(k.delta));
    TwoParamFamily out = convolve_inhom(hom_path ? k.regular : densify(k.regular),
                                        hom_path ? b : densify(b));
    if (!k.has_delta()) {
        return out;
    }
    if (hom_path) {
        for (int m = 0; m <= out.grid.n; ++m) {
            out.values[m].mat += (k.delta[0].mat * b.values[m].mat).eval();
        }
    } else {
        const TwoParamFamily bd = densify(b);
        for (int i = 0; i <= out.grid.n; ++i) {
            for (int j = 0; j <= i; ++j) {
                out.cell(i, j).mat += (k.delta[i].mat * bd.at(i, j).mat).eval();
            }
        }
    }
    return out;
}

TwoParamFamily convolve_kernel_right(const TwoParamFamily& b, const KernelFamily& k)
{
    check_same_grid(b.grid, k.grid());
    const bool hom_path = k.regular.is_homogeneous_storage() && b.is_homogeneous_storage()
                          && (!k.has_delta() || delta_all_equal(k.delta));
    TwoParamFamily out = convolve_inhom(hom_path ? b : densify(b),
                                        hom_path ? k.regular : densify(k.regular));
    if (!k.has_delta()) {
        return out;
    }
    if (hom_path) {
        for (int m = 0; m <= out.grid.n; ++m) {
            out.values[m].mat += (b.values[m].mat * k.delta[0].mat).eval();
        }
    } else {
        const TwoParamFamily bd = densify(b);
        for (int i = 0; i <= out.grid.n; ++i) {
            for (int j = 0; j <= i; ++j) {
                out.cell(i, j).mat += (bd.at(i, j).mat * k.delta[j].mat).eval();
            }
        }
    }
    return out;
}

double associativity_defect(const TwoParamFamily& a, const TwoParamFamily& b,
                            const TwoParamFamily& c)
{
    check_same_grid(a.grid, b.grid);
    check_same_grid(a.grid, c.grid);
    const TwoParamFamily left = convolve_inhom(convolve_inhom(a, b), c);
    const TwoParamFamily right = convolve_inhom(a, convolve_inhom(b, c));
    return sup_diff(left, right);
}

double homogeneity_defect(const TwoParamFamily& f)
{
    if (f.is_homogeneous_storage()) {
        return 0.0;
    }
    double defect = 0.0;
    for (int m = 0; m <= f.grid.n; ++m) {
        for (int j = 1; j + m <= f.grid.n; ++j) {
            defect = std::max(defect, spectral_norm(f.at(j + m, j).mat - f.at(m, 0).mat));
        }
    }
    return defect;
}

Eigen::MatrixXcd column_derivative(const TwoParamFamily& f, int i, int j)
{
    const int n = f.grid.n;
    const double h = f.grid.h;
    if (n - j < 2) {
        throw Error("column_derivative needs at least three column nodes");
    }
    if (i == j) {
        return (-3.0 * f.at(j, j).mat + 4.0 * f.at(j + 1, j).mat - f.at(j + 2, j).mat) / (2.0 * h);
    }
    if (i == n) {
        return (3.0 * f.at(n, j).mat - 4.0 * f.at(n - 1, j).mat + f.at(n - 2, j).mat) / (2.0 * h);
    }
    return (f.at(i + 1, j).mat - f.at(i - 1, j).mat) / (2.0 * h);
}

double sup_norm(const OneParamFamily& f)
{
    double v = 0.0;
    for (const auto& s : f.values) {
        v = std::max(v, spectral_norm(s.mat));
    }
    return v;
}

double sup_norm(const TwoParamFamily& f)
{
    double v = 0.0;
    for (const auto& s : f.values) {
        v = std::max(v, spectral_norm(s.mat));
    }
    return v;
}

double sup_diff(const TwoParamFamily& a, const TwoParamFamily& b)
{
    check_same_grid(a.grid, b.grid);
    double v = 0.0;
    if (a.storage == b.storage) {
        for (std::size_t k = 0; k < a.values.size(); ++k) {
            v = std::max(v, spectral_norm(a.values[k].mat - b.values[k].mat));
        }
        return v;
    }
    for (int i = 0; i <= a.grid.n; ++i) {
        for (int j = 0; j <= i; ++j) {
            v = std::max(v, spectral_norm(a.at(i, j).mat - b.at(i, j).mat));
        }
    }
    return v;
}

} // namespace qdyn
