#include "qdyn/models.hpp"

#include <cmath>

namespace qdyn {

namespace {

Operator sigma_minus()
{
    Operator s = Operator::Zero(2, 2);
    s(1, 0) = 1.0; // lowers |0> (excited, index 0) to |1>
    return s;
}

Operator sigma_z()
{
    Operator s = Operator::Zero(2, 2);
    s(0, 0) = 1.0;
    s(1, 1) = -1.0;
    return s;
}

void require_cptp(const SuperOp& channel)
{
    const CpVerdict cp = verdict_cp(channel);
    const TraceVerdict tr = verdict_trace(channel, TraceMode::preserving);
    if (!cp.cp || !tr.ok) {
        throw ChannelNotCPTP("jump channel must be CPTP (min Choi eig "
                             + std::to_string(cp.min_eig) + ", trace defect "
                             + std::to_string(tr.defect) + ")");
    }
}

// Homogeneous semi-Markov data: survival q, scalar memory kernel w with
// w * q = -q' (equivalently, in Laplace variables, wt = ft / qt).
struct SemiMarkovScalars {
    std::function<double(double)> q;
    std::function<double(double)> w;
    bool w_is_delta = false; // exponential waiting: w = kappa delta(t)
};

SemiMarkovScalars semi_markov_scalars(const Waiting& waiting)
{
    const double k = waiting.kappa;
    if (k <= 0.0) {
        throw InvalidConfig("waiting-time rate must be positive");
    }
    SemiMarkovScalars s;
    if (waiting.kind == Waiting::Kind::exponential) {
        s.q = [k](double t) { return std::exp(-k * t); };
        s.w = [k](double) { return k; };
        s.w_is_delta = true;
    } else {
        s.q = [k](double t) { return (1.0 + k * t) * std::exp(-k * t); };
        s.w = [k](double t) { return k * k * std::exp(-2.0 * k * t); };
    }
    return s;
}

JumpModel build_semi_markov_hom(const Waiting& waiting, const SuperOp& channel,
                                const TimeGrid& grid)
{
    const SemiMarkovScalars s = semi_markov_scalars(waiting);
    const int d = channel.dim;
    const SuperOp id = SuperOp::identity(d);

    std::vector<SuperOp> free_vals;
    free_vals.reserve(grid.n + 1);
    for (int m = 0; m <= grid.n; ++m) {
        free_vals.emplace_back(d, (s.q(m * grid.h) * id.mat).eval());
    }

    JumpModel model;
    model.regime = waiting.kind == Waiting::Kind::exponential ? Regime::semigroup
                                                              : Regime::homogeneous;
    model.free = TwoParamFamily::homogeneous(grid, std::move(free_vals));
    if (s.w_is_delta) {
        model.jump = KernelFamily::pure_delta_constant(grid, SuperOp(d, (waiting.kappa * channel.mat).eval()),
                                                       TwoParamFamily::Storage::homogeneous);
        model.zgen = KernelFamily::pure_delta_constant(grid, SuperOp(d, (waiting.kappa * id.mat).eval()),
                                                       TwoParamFamily::Storage::homogeneous);
    } else {
        std::vector<SuperOp> jump_vals, z_vals;
        jump_vals.reserve(grid.n + 1);
        z_vals.reserve(grid.n + 1);
        for (int m = 0; m <= grid.n; ++m) {
            const double w = s.w(m * grid.h);
            jump_vals.emplace_back(d, (w * channel.mat).eval());
            z_vals.emplace_back(d, (w * id.mat).eval());
        }
        model.jump = KernelFamily::pure_regular(
            TwoParamFamily::homogeneous(grid, std::move(jump_vals)));
        model.zgen = KernelFamily::pure_regular(
            TwoParamFamily::homogeneous(grid, std::move(z_vals)));
    }
    return model;
}

// Inhomogeneous variant: local rate kappa(t) with antiderivative by fine RK
// accumulation, kernel w(t,tau) = kappa(tau)^2 e^{-2 (K(t)-K(tau))}, and the
// free survival q(t,t0) from the equivalent local system
//     q' = -p,   p' = kappa(t)^2 q - 2 kappa(t) p,   q(t0)=1, p(t0)=0,
// which reproduces (1 + kappa dt) e^{-kappa dt} exactly for constant kappa.
JumpModel build_semi_markov_inhom(const std::function<double(double)>& rate,
                                  const SuperOp& channel, const TimeGrid& grid)
{
    const int d = channel.dim;
    const SuperOp id = SuperOp::identity(d);
    const int n = grid.n;
    const double h = grid.h;
    const int sub = 16; // fine substeps per grid step for the survival ODE

    std::vector<double> kap(n + 1), kint(n + 1, 0.0);
    for (int j = 0; j <= n; ++j) {
        const double k = rate(grid.node(j));
        if (k <= 0.0) {
            throw NegativeRate("kappa(t) must stay positive on the grid");
        }
        kap[j] = k;
    }
    // K(t_j) = int_0^{t_j} kappa, Simpson on fine substeps.
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        const double hs = h / sub;
        for (int m = 0; m < sub; ++m) {
            const double a = grid.node(j) + m * hs;
            acc += (hs / 6.0)
                   * (rate(a) + 4.0 * rate(a + 0.5 * hs) + rate(a + hs));
        }
        kint[j + 1] = kint[j] + acc;
    }

    TwoParamFamily free = TwoParamFamily::dense_zero(grid, d);
    for (int j = 0; j <= n; ++j) {
        double q = 1.0, p = 0.0;
        free.cell(j, j).mat = id.mat;
        for (int i = j; i < n; ++i) {
            const double hs = h / sub;
            for (int m = 0; m < sub; ++m) {
                const double t = grid.node(i) + m * hs;
                auto f = [&](double tt, double qq, double pp, double& dq, double& dp) {
                    const double k = rate(tt);
                    dq = -pp;
                    dp = k * k * qq - 2.0 * k * pp;
                };
                double dq1, dp1, dq2, dp2, dq3, dp3, dq4, dp4;
                f(t, q, p, dq1, dp1);
                f(t + 0.5 * hs, q + 0.5 * hs * dq1, p + 0.5 * hs * dp1, dq2, dp2);
                f(t + 0.5 * hs, q + 0.5 * hs * dq2, p + 0.5 * hs * dp2, dq3, dp3);
                f(t + hs, q + hs * dq3, p + hs * dp3, dq4, dp4);
                q += (hs / 6.0) * (dq1 + 2.0 * dq2 + 2.0 * dq3 + dq4);
                p += (hs / 6.0) * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4);
            }
            free.cell(i + 1, j).mat = q * id.mat;
        }
    }

    TwoParamFamily jump_reg = TwoParamFamily::dense_zero(grid, d);
    TwoParamFamily z_reg = TwoParamFamily::dense_zero(grid, d);
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double w = kap[j] * kap[j] * std::exp(-2.0 * (kint[i] - kint[j]));
            jump_reg.cell(i, j).mat = w * channel.mat;
            z_reg.cell(i, j).mat = w * id.mat;
        }
    }

    JumpModel model;
    model.regime = Regime::inhomogeneous;
    model.free = std::move(free);
    model.jump = KernelFamily::pure_regular(std::move(jump_reg));
    model.zgen = KernelFamily::pure_regular(std::move(z_reg));
    return model;
}

} // namespace

SuperOp depolarizing_channel(int dim)
{
    const int dd = dim * dim;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dd, dd);
    // vec(E(rho)) = (I/d) Tr(rho): column l*d+l feeds diagonal entries k*d+k.
    for (int k = 0; k < dim; ++k) {
        for (int l = 0; l < dim; ++l) {
            m(k * dim + k, l * dim + l) = 1.0 / dim;
        }
    }
    return SuperOp(dim, std::move(m));
}

ModelDescriptor model_amplitude_damping(double gamma)
{
    if (gamma < 0.0) {
        throw NegativeRate("amplitude damping rate must be non-negative");
    }
    ModelDescriptor md;
    md.name = "amplitude_damping";
    md.regime = Regime::semigroup;
    md.parameters = {{"gamma", gamma}};
    md.gkls = GKLSSpec::constant(Operator::Zero(2, 2), {{gamma, sigma_minus()}});
    const GKLSSpec spec = *md.gkls;
    md.build = [spec](const TimeGrid& g) {
        const GeneratorSplit s = split_generator(spec, 0.0);
        return build_semigroup_model(s.phi, s.z, g);
    };
    return md;
}

ModelDescriptor model_amplitude_damping(std::function<double(double)> gamma)
{
    ModelDescriptor md;
    md.name = "amplitude_damping";
    md.regime = Regime::inhom_semigroup;
    GKLSSpec spec;
    spec.dim = 2;
    spec.hamiltonian = [](double) { return Operator::Zero(2, 2); };
    spec.channels = {{std::move(gamma), [](double) { return sigma_minus(); }}};
    spec.time_dependent = true;
    md.gkls = spec;
    md.build = [spec](const TimeGrid& g) { return build_inhom_semigroup_model(spec, g); };
    return md;
}

ModelDescriptor model_semi_markov(const Waiting& waiting, const SuperOp& channel,
                                  std::optional<std::function<double(double)>> rate)
{
    require_cptp(channel);
    ModelDescriptor md;
    md.name = "semi_markov";
    md.parameters = {{"kappa", waiting.kappa}};
    if (rate) {
        if (waiting.kind != Waiting::Kind::gamma2) {
            throw InvalidConfig("variable-rate semi-Markov supports gamma2 waiting only");
        }
        md.regime = Regime::inhomogeneous;
        auto r = *rate;
        md.build = [r, channel](const TimeGrid& g) {
            return build_semi_markov_inhom(r, channel, g);
        };
    } else {
        md.regime = waiting.kind == Waiting::Kind::exponential ? Regime::semigroup
                                                               : Regime::homogeneous;
        const Waiting w = waiting;
        md.build = [w, channel](const TimeGrid& g) {
            return build_semi_markov_hom(w, channel, g);
        };
    }
    return md;
}

ModelDescriptor model_dephasing_inhom(std::function<double(double)> gamma, double omega)
{
    ModelDescriptor md;
    md.name = "dephasing";
    md.regime = Regime::inhom_semigroup;
    md.parameters = {{"omega", omega}};
    GKLSSpec spec;
    spec.dim = 2;
    spec.hamiltonian = [omega](double) { return (0.5 * omega * sigma_z()).eval(); };
    spec.channels = {{std::move(gamma), [](double) { return sigma_z(); }}};
    spec.time_dependent = true;
    md.gkls = spec;
    md.build = [spec](const TimeGrid& g) { return build_inhom_semigroup_model(spec, g); };
    return md;
}

namespace {

double param(const std::map<std::string, double>& p, const std::string& key, double fallback)
{
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

std::function<double(double)> rate_profile(const std::map<std::string, double>& p,
                                           double base)
{
    const double amp = param(p, "gamma_sin_amp", 0.0);
    const double freq = param(p, "gamma_sin_freq", 0.0);
    return [base, amp, freq](double t) { return base + amp * std::sin(freq * t); };
}

} // namespace

std::vector<std::string> model_names()
{
    return {"amplitude_damping", "semi_markov_exp", "semi_markov_gamma2",
            "semi_markov_inhom", "dephasing"};
}

ModelDescriptor make_model(const std::string& name,
                           const std::map<std::string, double>& params)
{
    if (name == "amplitude_damping") {
        const double gamma = param(params, "gamma", 1.0);
        if (param(params, "gamma_sin_amp", 0.0) != 0.0) {
            return model_amplitude_damping(rate_profile(params, gamma));
        }
        return model_amplitude_damping(gamma);
    }
    if (name == "semi_markov_exp" || name == "semi_markov_gamma2") {
        Waiting w;
        w.kind = name == "semi_markov_exp" ? Waiting::Kind::exponential
                                           : Waiting::Kind::gamma2;
        w.kappa = param(params, "kappa", 1.0);
        return model_semi_markov(w, depolarizing_channel(2));
    }
    if (name == "semi_markov_inhom") {
        Waiting w;
        w.kind = Waiting::Kind::gamma2;
        const double k0 = param(params, "kappa", 1.0);
        w.kappa = k0;
        const double quad = param(params, "kappa_quad", 0.1);
        return model_semi_markov(
            w, depolarizing_channel(2),
            std::function<double(double)>([k0, quad](double t) { return k0 + quad * t * t; }));
    }
    if (name == "dephasing") {
        const double gamma = param(params, "gamma", 1.0);
        const double omega = param(params, "omega", 0.0);
        return model_dephasing_inhom(rate_profile(params, gamma), omega);
    }
    throw UnknownModel("unknown model: " + name);
}

} // namespace qdyn
