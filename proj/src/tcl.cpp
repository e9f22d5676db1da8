#include "qdyn/tcl.hpp"

#include <cmath>
#include <limits>

namespace qdyn {

namespace {

double condition_number(const Eigen::MatrixXcd& m)
{
    const auto sv = m.jacobiSvd().singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return sv(0) / smin;
}

} // namespace

bool TCLFamily::complete() const
{
    for (int j = t0_index; j < static_cast<int>(values.size()); ++j) {
        if (!values[j]) {
            return false;
        }
    }
    return !values.empty();
}

int TCLFamily::dim() const
{
    for (const auto& v : values) {
        if (v) {
            return v->dim;
        }
    }
    return 0;
}

TCLFamily extract_tcl(const TwoParamFamily& family, int t0_index, double cond_max)
{
    const TimeGrid& g = family.grid;
    if (t0_index < 0 || t0_index > g.n) {
        throw Error("t0_index out of range");
    }
    if (cond_max <= 1.0) {
        throw Error("cond_max must exceed 1");
    }
    if (g.n - t0_index < 2) {
        throw Error("extract_tcl needs at least three nodes past t0");
    }

    TCLFamily out;
    out.grid = g;
    out.t0_index = t0_index;
    out.values.resize(g.n + 1);
    out.condition_log.assign(g.n + 1, 0.0);

    bool any = false;
    for (int i = t0_index; i <= g.n; ++i) {
        const Eigen::MatrixXcd& lam = family.at(i, t0_index).mat;
        const double cond = condition_number(lam);
        out.condition_log[i] = cond;
        if (cond > cond_max) {
            continue;
        }
        const Eigen::MatrixXcd d = column_derivative(family, i, t0_index);
        out.values[i] = SuperOp(family.dim(), d * lam.inverse());
        any = true;
    }
    if (!any) {
        throw SingularMap("no node past t0 was invertible within cond_max");
    }
    return out;
}

TwoParamFamily integrate_tcl(const TCLFamily& tcl)
{
    if (!tcl.complete()) {
        throw Error("integrate_tcl requires a complete generator column");
    }
    const TimeGrid& g = tcl.grid;
    const int d = tcl.dim();
    const int dd = d * d;
    const double h = g.h;
    const int j0 = tcl.t0_index;

    TwoParamFamily out = TwoParamFamily::dense_identity_diag(g, d);
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Identity(dd, dd);
    for (int i = j0; i < g.n; ++i) {
        const Eigen::MatrixXcd& l0 = tcl.values[i]->mat;
        const Eigen::MatrixXcd& l1 = tcl.values[i + 1]->mat;
        const Eigen::MatrixXcd lh = 0.5 * (l0 + l1);
        const Eigen::MatrixXcd k1 = l0 * y;
        const Eigen::MatrixXcd k2 = lh * (y + 0.5 * h * k1);
        const Eigen::MatrixXcd k3 = lh * (y + 0.5 * h * k2);
        const Eigen::MatrixXcd k4 = l1 * (y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.cell(i + 1, j0).mat = y;
    }
    return out;
}

SuperOp propagator(const TwoParamFamily& family, int i, int j, int t0_index, double cond_max)
{
    if (!(t0_index <= j && j <= i && i <= family.grid.n)) {
        throw Error("propagator requires t0_index <= j <= i <= n");
    }
    const Eigen::MatrixXcd& base = family.at(j, t0_index).mat;
    const double cond = condition_number(base);
    if (cond > cond_max) {
        throw SingularMap("base map at (" + std::to_string(j) + "," + std::to_string(t0_index)
                          + ") has condition number " + std::to_string(cond));
    }
    return SuperOp(family.dim(), (family.at(i, t0_index).mat * base.inverse()).eval());
}

double composition_defect(const TwoParamFamily& family)
{
    const int n = family.grid.n;
    double res = 0.0;
    for (int k = 0; k <= n; ++k) {
        for (int j = k; j <= n; ++j) {
            for (int i = j; i <= n; ++i) {
                const Eigen::MatrixXcd d =
                    family.at(i, j).mat * family.at(j, k).mat - family.at(i, k).mat;
                res = std::max(res, spectral_norm(d));
            }
        }
    }
    return res;
}

} // namespace qdyn
