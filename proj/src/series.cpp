#include "qdyn/series.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace qdyn {

namespace {

// Trace non-increasing on states is implied by Tr S(E_jj) <= 1 + tol on the
// diagonal matrix units together with CP; we check the Hermitian trace form.
void check_free_cell(const SuperOp& s, double cp_tol, int i, int j)
{
    const CpVerdict cp = verdict_cp(s, cp_tol);
    if (!cp.cp) {
        throw Error("free family not CP at (" + std::to_string(i) + "," + std::to_string(j)
                    + "), min Choi eig " + std::to_string(cp.min_eig));
    }
    for (int a = 0; a < s.dim; ++a) {
        Operator e = Operator::Zero(s.dim, s.dim);
        e(a, a) = 1.0;
        const double tr = qdyn::apply(s, e).trace().real();
        if (tr > 1.0 + cp_tol) {
            throw Error("free family trace-increasing at (" + std::to_string(i) + ","
                        + std::to_string(j) + "): " + std::to_string(tr));
        }
    }
}

void check_cp(const SuperOp& s, double cp_tol, const char* what)
{
    const CpVerdict cp = verdict_cp(s, cp_tol);
    if (!cp.cp) {
        throw Error(std::string(what) + " not CP, min Choi eig " + std::to_string(cp.min_eig));
    }
}

} // namespace

void validate_model(const JumpModel& model, double cp_tol)
{
    const TimeGrid& g = model.free.grid;
    const int d = model.free.dim();
    if (model.free.is_homogeneous_storage()) {
        if ((model.free.values[0].mat - SuperOp::identity(d).mat).norm() > 1e-12) {
            throw Error("free family must be identity at zero time difference");
        }
        for (int m = 0; m <= g.n; ++m) {
            check_free_cell(model.free.values[m], cp_tol, m, 0);
        }
    } else {
        for (int i = 0; i <= g.n; ++i) {
            if ((model.free.at(i, i).mat - SuperOp::identity(d).mat).norm() > 1e-12) {
                throw Error("free family must be identity on the diagonal");
            }
            for (int j = 0; j <= i; ++j) {
                check_free_cell(model.free.at(i, j), cp_tol, i, j);
            }
        }
    }
    if (model.waive_cp_check) {
        return;
    }
    if (model.jump.has_delta()) {
        for (const auto& a : model.jump.delta) {
            check_cp(a, cp_tol, "jump delta part");
        }
    }
    for (const auto& s : model.jump.regular.values) {
        check_cp(s, cp_tol, "jump regular part");
    }
}

JumpModel build_semigroup_model(const SuperOp& phi, const SuperOp& z, const TimeGrid& grid)
{
    if (phi.dim != z.dim) {
        throw DimensionMismatch("phi and z dimensions differ");
    }
    const int d = phi.dim;
    std::vector<SuperOp> free_nodes;
    free_nodes.reserve(grid.n + 1);
    for (int j = 0; j <= grid.n; ++j) {
        const double t = j * grid.h;
        free_nodes.emplace_back(d, (-t * z.mat).exp().eval());
    }
    JumpModel model;
    model.regime = Regime::semigroup;
    model.free = TwoParamFamily::homogeneous(grid, std::move(free_nodes));
    model.jump = KernelFamily::pure_delta_constant(grid, phi, TwoParamFamily::Storage::homogeneous);
    model.zgen = KernelFamily::pure_delta_constant(grid, z, TwoParamFamily::Storage::homogeneous);
    return model;
}

JumpModel build_inhom_semigroup_model(const GKLSSpec& spec, const TimeGrid& grid)
{
    const int d = spec.dim;
    const int dd = d * d;
    // Z at nodes and half-nodes for the RK4 interior stages.
    std::vector<Eigen::MatrixXcd> z_node(grid.n + 1), z_half(std::max(grid.n, 0));
    std::vector<SuperOp> phi_node(grid.n + 1, SuperOp::zero(d));
    for (int j = 0; j <= grid.n; ++j) {
        GeneratorSplit s = split_generator(spec, grid.node(j));
        z_node[j] = s.z.mat;
        phi_node[j] = s.phi;
        if (j < grid.n) {
            z_half[j] = split_generator(spec, grid.node(j) + 0.5 * grid.h).z.mat;
        }
    }

    TwoParamFamily free = TwoParamFamily::dense_zero(grid, d);
    const double h = grid.h;
    for (int j = 0; j <= grid.n; ++j) {
        Eigen::MatrixXcd y = Eigen::MatrixXcd::Identity(dd, dd);
        free.cell(j, j).mat = y;
        for (int i = j; i < grid.n; ++i) {
            const Eigen::MatrixXcd k1 = -z_node[i] * y;
            const Eigen::MatrixXcd k2 = -z_half[i] * (y + 0.5 * h * k1);
            const Eigen::MatrixXcd k3 = -z_half[i] * (y + 0.5 * h * k2);
            const Eigen::MatrixXcd k4 = -z_node[i + 1] * (y + h * k3);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            free.cell(i + 1, j).mat = y;
        }
    }

    std::vector<SuperOp> z_sup;
    z_sup.reserve(grid.n + 1);
    for (int j = 0; j <= grid.n; ++j) {
        z_sup.emplace_back(d, z_node[j]);
    }

    JumpModel model;
    model.regime = Regime::inhom_semigroup;
    model.free = std::move(free);
    model.jump = KernelFamily::pure_delta(grid, std::move(phi_node), TwoParamFamily::Storage::dense);
    model.zgen = KernelFamily::pure_delta(grid, std::move(z_sup), TwoParamFamily::Storage::dense);
    return model;
}

SeriesResult run_series(const JumpModel& model, const SeriesOptions& opt)
{
    if (opt.tol <= 0.0 || opt.lmax < 0) {
        throw Error("series options: tol must be positive, lmax non-negative");
    }
    SeriesResult res;
    res.terms.push_back(model.free);
    res.total = model.free;
    res.truncation_norm = sup_norm(model.free);
    res.converged = false;
    for (int l = 1; l <= opt.lmax; ++l) {
        TwoParamFamily term =
            convolve_inhom(model.free, convolve_kernel(model.jump, res.terms.back()));
        res.truncation_norm = sup_norm(term);
        res.total += term;
        res.terms.push_back(std::move(term));
        if (res.truncation_norm < opt.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

SeriesResult series_semigroup(const SuperOp& phi, const SuperOp& z, const TimeGrid& grid,
                              const SeriesOptions& opt)
{
    return run_series(build_semigroup_model(phi, z, grid), opt);
}

SeriesResult series_homogeneous(const JumpModel& model, const SeriesOptions& opt)
{
    if (model.regime != Regime::homogeneous && model.regime != Regime::semigroup) {
        throw Error("series_homogeneous expects a homogeneous-regime model");
    }
    if (!model.free.is_homogeneous_storage()) {
        throw Error("series_homogeneous expects homogeneous-storage families");
    }
    return run_series(model, opt);
}

SeriesResult series_inhom_semigroup(const GKLSSpec& spec, const TimeGrid& grid,
                                    const SeriesOptions& opt)
{
    return run_series(build_inhom_semigroup_model(spec, grid), opt);
}

SeriesResult series_inhomogeneous(const JumpModel& model, const SeriesOptions& opt)
{
    return run_series(model, opt);
}

QPResult resum_qp(const JumpModel& model, const SeriesOptions& opt)
{
    const TwoParamFamily q = convolve_kernel(model.jump, model.free);
    const TwoParamFamily p = convolve_kernel_right(model.free, model.jump);

    QPResult res;
    res.converged = false;

    TwoParamFamily q_pow = q;
    TwoParamFamily q_sum = q;
    TwoParamFamily p_pow = p;
    TwoParamFamily p_sum = p;
    for (int l = 2; l <= opt.lmax; ++l) {
        q_pow = convolve_inhom(q_pow, q);
        q_sum += q_pow;
        p_pow = convolve_inhom(p_pow, p);
        p_sum += p_pow;
        if (sup_norm(q_pow) < opt.tol && sup_norm(p_pow) < opt.tol) {
            res.converged = true;
            break;
        }
    }

    res.via_q = model.free;
    res.via_q += convolve_inhom(model.free, q_sum);
    res.via_p = model.free;
    res.via_p += convolve_inhom(p_sum, model.free);
    return res;
}

double hierarchy_residual(const SeriesResult& result, const JumpModel& model)
{
    if (!model.zgen) {
        throw Error("hierarchy_residual requires the model's Z generator family");
    }
    const TimeGrid& g = model.free.grid;
    double res = 0.0;
    for (std::size_t l = 0; l < result.terms.size(); ++l) {
        const TwoParamFamily& term = result.terms[l];
        const TwoParamFamily zt = convolve_kernel(*model.zgen, term);
        std::optional<TwoParamFamily> pt;
        if (l > 0) {
            pt = convolve_kernel(model.jump, result.terms[l - 1]);
        }
        const int jmax = term.is_homogeneous_storage() ? 0 : g.n - 2;
        for (int j = 0; j <= jmax; ++j) {
            if (g.n - j < 2) {
                continue;
            }
            for (int i = j; i <= g.n; ++i) {
                Eigen::MatrixXcd r = column_derivative(term, i, j) + zt.at(i, j).mat;
                if (pt) {
                    r -= pt->at(i, j).mat;
                }
                res = std::max(res, spectral_norm(r));
            }
        }
    }
    return res;
}

} // namespace qdyn
