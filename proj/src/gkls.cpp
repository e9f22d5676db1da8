#include "qdyn/gkls.hpp"

#include <cmath>

namespace qdyn {

namespace {

constexpr double kHermTol = 1e-10;

Operator sample_hamiltonian(const GKLSSpec& spec, double t)
{
    Operator h = spec.hamiltonian ? spec.hamiltonian(t)
                                  : Operator::Zero(spec.dim, spec.dim).eval();
    if (h.rows() != spec.dim || h.cols() != spec.dim) {
        throw DimensionMismatch("H(t) dimension does not match spec");
    }
    if ((h - h.adjoint()).norm() > kHermTol) {
        throw NonHermitianH("H(t) is not Hermitian at t = " + std::to_string(t));
    }
    return h;
}

} // namespace

GKLSSpec GKLSSpec::constant(const Operator& h,
                            const std::vector<std::pair<double, Operator>>& channels)
{
    GKLSSpec spec;
    spec.dim = static_cast<int>(h.rows());
    spec.hamiltonian = [h](double) { return h; };
    for (const auto& [gamma, op] : channels) {
        spec.channels.push_back({[gamma](double) { return gamma; }, [op](double) { return op; }});
    }
    spec.time_dependent = false;
    return spec;
}

GeneratorSplit split_generator(const GKLSSpec& spec, double t)
{
    const int d = spec.dim;
    const Operator h = sample_hamiltonian(spec, t);

    std::vector<std::pair<double, Operator>> kraus;
    Operator c = cpx(0.0, 1.0) * h;
    for (const auto& ch : spec.channels) {
        const double gamma = ch.rate(t);
        if (gamma < 0.0) {
            throw NegativeRate("gamma(t) = " + std::to_string(gamma) + " at t = "
                               + std::to_string(t));
        }
        Operator l = ch.noise(t);
        if (l.rows() != d || l.cols() != d) {
            throw DimensionMismatch("noise operator dimension does not match spec");
        }
        kraus.emplace_back(gamma, l);
        c += 0.5 * gamma * (l.adjoint() * l);
    }

    GeneratorSplit out;
    out.phi = kraus_to_superop(kraus, d);
    out.z = SuperOp::left_mult(c) + SuperOp::right_mult(c.adjoint().eval());
    return out;
}

SuperOp build_generator(const GKLSSpec& spec, double t)
{
    const GeneratorSplit s = split_generator(spec, t);
    return s.phi - s.z;
}

GeneratorFamily sample_family(const GKLSSpec& spec, const TimeGrid& grid)
{
    GeneratorFamily fam;
    fam.l_nodes.reserve(grid.n + 1);
    fam.phi_nodes.reserve(grid.n + 1);
    fam.z_nodes.reserve(grid.n + 1);
    for (int j = 0; j <= grid.n; ++j) {
        GeneratorSplit s = split_generator(spec, grid.node(j));
        fam.l_nodes.push_back(s.phi - s.z);
        fam.phi_nodes.push_back(std::move(s.phi));
        fam.z_nodes.push_back(std::move(s.z));
    }
    return fam;
}

} // namespace qdyn
