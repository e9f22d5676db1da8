#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qdyn/models.hpp"
#include "qdyn/volterra.hpp"

using namespace qdyn;

namespace {

Operator sigma_minus()
{
    Operator s = Operator::Zero(2, 2);
    s(1, 0) = 1.0;
    return s;
}

JumpModel gamma2_model(int steps)
{
    Waiting w;
    w.kind = Waiting::Kind::gamma2;
    w.kappa = 1.0;
    const TimeGrid g(0.0, 1.0 / steps, steps);
    return model_semi_markov(w, depolarizing_channel(2)).build(g);
}

} // namespace

TEST_CASE("pure-delta kernel reproduces the semigroup")
{
    const GKLSSpec spec = GKLSSpec::constant(Operator::Zero(2, 2), {{1.0, sigma_minus()}});
    const GeneratorSplit s = split_generator(spec, 0.0);
    const int steps = 128;
    const TimeGrid g(0.0, 1.0 / steps, steps);
    const JumpModel jm = build_semigroup_model(s.phi, s.z, g);

    const TwoParamFamily sol = solve_volterra(kernel_from_model(jm), jm.free.grid);
    REQUIRE(sol.is_homogeneous_storage());
    const SeriesResult series = series_homogeneous(jm);
    CHECK(sup_diff(sol, series.total) < 10.0 * g.h * g.h);
}

TEST_CASE("Volterra solution matches the jump series on a memory kernel")
{
    const int steps = 128;
    const JumpModel jm = gamma2_model(steps);
    const double h = 1.0 / steps;
    const TwoParamFamily sol = solve_volterra(kernel_from_model(jm), jm.free.grid);
    const SeriesResult series = series_homogeneous(jm);
    CHECK(sup_diff(sol, series.total) < 10.0 * h * h);
    // the solution stays trace preserving: the kernel annihilates traces
    for (int m = 0; m <= steps; ++m) {
        CHECK(verdict_trace(sol.values[m], TraceMode::preserving, 10.0 * h * h).ok);
    }
}

TEST_CASE("kernel extraction recovers the semigroup generator")
{
    const GKLSSpec spec = GKLSSpec::constant(Operator::Zero(2, 2), {{1.0, sigma_minus()}});
    const GeneratorSplit s = split_generator(spec, 0.0);
    const int steps = 128;
    const TimeGrid g(0.0, 1.0 / steps, steps);
    const JumpModel jm = build_semigroup_model(s.phi, s.z, g);

    const KernelFamily z = z_from_free(jm.free);
    REQUIRE(z.has_delta());
    // delta part = Z at every node, regular part ~ 0
    for (int m = 0; m <= steps; ++m) {
        CHECK((z.delta[m].mat - s.z.mat).norm() < 50.0 * g.h * g.h);
    }
    CHECK(sup_norm(z.regular) < 1.0); // bounded noise, no spurious kernel mass
    CHECK(reconvolution_residual(jm.free, z) < 10.0 * g.h * g.h);
}

TEST_CASE("kernel extraction recovers the gamma2 memory kernel")
{
    const int steps = 128;
    const JumpModel jm = gamma2_model(steps);
    const double h = 1.0 / steps;
    const KernelFamily z = z_from_free(jm.free);

    // closed form: delta part 0, regular kernel kappa^2 e^{-2 kappa t} id
    if (z.has_delta()) {
        CHECK(spectral_norm(z.delta[0].mat) < 0.1);
    }
    double kernel_defect = 0.0;
    for (int m = 0; m <= steps - 2; ++m) {
        const double w = std::exp(-2.0 * m * h);
        kernel_defect = std::max(
            kernel_defect,
            (z.regular.at(m, 0).mat - w * Eigen::MatrixXcd::Identity(4, 4)).norm());
    }
    CHECK(kernel_defect < 0.05); // first-order deconvolution accuracy
    CHECK(reconvolution_residual(jm.free, z) < 10.0 * h * h);
}

TEST_CASE("re-solving the extracted kernel reproduces the free evolution")
{
    const int steps = 128;
    const JumpModel jm = gamma2_model(steps);
    const double h = 1.0 / steps;
    const KernelFamily z = z_from_free(jm.free);
    // free evolution solves the memory kernel equation with K = -Z
    KernelFamily minus_z;
    minus_z.regular = z.regular;
    for (auto& s : minus_z.regular.values) {
        s.mat = (-s.mat).eval();
    }
    if (z.has_delta()) {
        minus_z.delta = z.delta;
        for (auto& s : minus_z.delta) {
            s.mat = (-s.mat).eval();
        }
    }
    const TwoParamFamily re = solve_volterra(minus_z, jm.free.grid);
    CHECK(sup_diff(re, jm.free) < 10.0 * h * h);
}

TEST_CASE("new master equation residual is second order")
{
    const JumpModel jm128 = gamma2_model(128);
    const JumpModel jm256 = gamma2_model(256);
    const SeriesResult r128 = series_homogeneous(jm128);
    const SeriesResult r256 = series_homogeneous(jm256);
    const double res128 = new_me_residual(r128.total, jm128.free, jm128.jump.regular);
    const double res256 = new_me_residual(r256.total, jm256.free, jm256.jump.regular);
    CHECK(res128 < 10.0 / (128.0 * 128.0));
    CHECK(std::log2(res128 / res256) > 1.8);
}

TEST_CASE("Laplace resolvent identity holds for the gamma2 model")
{
    Waiting w;
    w.kind = Waiting::Kind::gamma2;
    w.kappa = 1.0;
    const TimeGrid g(0.0, 1.0 / 128, 128 * 12); // T = 12 so the tail is negligible
    const JumpModel jm = model_semi_markov(w, depolarizing_channel(2)).build(g);
    const SeriesResult res = series_homogeneous(jm);
    const std::vector<double> defects = laplace_check(res, jm, {1.0, 2.0}, 1e-4);
    for (const double d : defects) {
        CHECK(d < 1e-3);
    }
}

TEST_CASE("heavy Laplace tails are rejected")
{
    Waiting w;
    w.kind = Waiting::Kind::gamma2;
    w.kappa = 1.0;
    const TimeGrid g(0.0, 1.0 / 32, 32); // T = 1: e^{-sT} tail far above tolerance
    const JumpModel jm = model_semi_markov(w, depolarizing_channel(2)).build(g);
    const SeriesResult res = series_homogeneous(jm);
    CHECK_THROWS_AS(laplace_check(res, jm, {1.0}), TailTooHeavy);
}

TEST_CASE("singular free diagonals are rejected during deconvolution")
{
    const TimeGrid g(0.0, 0.1, 8);
    // ill-conditioned diagonal blocks
    TwoParamFamily bad = TwoParamFamily::dense_zero(g, 2);
    for (int i = 0; i <= g.n; ++i) {
        for (int j = 0; j <= i; ++j) {
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(4, 4);
            if (i == j) {
                m(3, 3) = 1e-12;
            }
            bad.cell(i, j).mat = m;
        }
    }
    CHECK_THROWS_AS(z_from_free(bad), SingularDeconvolution);
}
