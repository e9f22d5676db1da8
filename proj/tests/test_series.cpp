#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qdyn/models.hpp"
#include "qdyn/series.hpp"

using namespace qdyn;

namespace {

// Scaling-and-squaring Taylor exponential, independent of the library's
// matrix-function code paths; accurate to ~1e-13 for the norms used here.
Eigen::MatrixXcd expm_oracle(const Eigen::MatrixXcd& m)
{
    const double norm = m.cwiseAbs().sum();
    int squarings = 0;
    while (norm / std::pow(2.0, squarings) > 0.5) {
        ++squarings;
    }
    const Eigen::MatrixXcd a = m / std::pow(2.0, squarings);
    Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(m.rows(), m.cols());
    Eigen::MatrixXcd term = result;
    for (int k = 1; k <= 20; ++k) {
        term = (term * a / k).eval();
        result += term;
    }
    for (int s = 0; s < squarings; ++s) {
        result = (result * result).eval();
    }
    return result;
}

Operator sigma_minus()
{
    Operator s = Operator::Zero(2, 2);
    s(1, 0) = 1.0;
    return s;
}

} // namespace

TEST_CASE("semigroup jump series sums to the exponential")
{
    const double gamma = 1.0;
    const GKLSSpec spec = GKLSSpec::constant(Operator::Zero(2, 2), {{gamma, sigma_minus()}});
    const GeneratorSplit s = split_generator(spec, 0.0);
    const SuperOp l = build_generator(spec, 0.0);

    const TimeGrid g(0.0, 1.0 / 128, 128);
    const SeriesResult res = series_semigroup(s.phi, s.z, g);
    REQUIRE(res.converged);

    double defect = 0.0;
    for (int m = 0; m <= g.n; ++m) {
        const Eigen::MatrixXcd expect = expm_oracle((m * g.h * l.mat).eval());
        defect = std::max(defect, (res.total.at(m, 0).mat - expect).norm());
    }
    CHECK(defect < 1e-4);
}

TEST_CASE("amplitude damping series terminates after one jump")
{
    // a second jump lands on the annihilated ground state, so the series is
    // exactly finite
    const GKLSSpec spec = GKLSSpec::constant(Operator::Zero(2, 2), {{1.0, sigma_minus()}});
    const GeneratorSplit s = split_generator(spec, 0.0);
    const TimeGrid g(0.0, 1.0 / 64, 64);
    const SeriesResult res = series_semigroup(s.phi, s.z, g);
    CHECK(res.converged);
    CHECK(res.terms.size() == 3);
    CHECK(res.truncation_norm == 0.0);
}

TEST_CASE("series hierarchy residual is second order")
{
    Waiting w;
    w.kind = Waiting::Kind::gamma2;
    w.kappa = 1.0;
    const ModelDescriptor md = model_semi_markov(w, depolarizing_channel(2));

    const auto residual_at = [&](int steps) {
        const TimeGrid g(0.0, 1.0 / steps, steps);
        const JumpModel jm = md.build(g);
        const SeriesResult res = series_homogeneous(jm);
        return hierarchy_residual(res, jm);
    };
    const double h = 1.0 / 64;
    CHECK(residual_at(64) < 10.0 * h * h);
}

TEST_CASE("Q and P resummations agree with the term-by-term series")
{
    Waiting w;
    w.kind = Waiting::Kind::gamma2;
    w.kappa = 1.0;
    const TimeGrid g(0.0, 1.0 / 64, 64);
    const JumpModel jm = model_semi_markov(w, depolarizing_channel(2)).build(g);
    const SeriesResult res = series_homogeneous(jm);
    const QPResult qp = resum_qp(jm);
    REQUIRE(qp.converged);
    // regrouping the series only commutes with the quadrature to O(h^2)
    CHECK(sup_diff(qp.via_q, res.total) < 10.0 * g.h * g.h);
    CHECK(sup_diff(qp.via_p, res.total) < 10.0 * g.h * g.h);
}

TEST_CASE("homogeneous and lifted inhomogeneous series are bitwise identical")
{
    Waiting w;
    w.kind = Waiting::Kind::exponential;
    w.kappa = 1.0;
    const TimeGrid g(0.0, 1.0 / 32, 32);
    const JumpModel hom = model_semi_markov(w, depolarizing_channel(2)).build(g);

    JumpModel dense = hom;
    dense.regime = Regime::inhomogeneous;
    dense.free = densify(hom.free);
    dense.jump.regular = densify(hom.jump.regular);
    dense.zgen->regular = densify(hom.zgen->regular);

    const SeriesResult a = series_homogeneous(hom);
    const SeriesResult b = series_inhomogeneous(dense);
    REQUIRE(a.terms.size() == b.terms.size());
    for (int i = 0; i <= g.n; ++i) {
        for (int j = 0; j <= i; ++j) {
            CHECK(a.total.at(i, j).mat == b.total.at(i, j).mat); // bitwise
        }
    }
}

TEST_CASE("validate_model rejects a free family without identity diagonal")
{
    const TimeGrid g(0.0, 0.25, 4);
    JumpModel jm;
    jm.free = TwoParamFamily::dense_zero(g, 2);
    jm.jump = KernelFamily::pure_delta_constant(g, SuperOp::identity(2),
                                                TwoParamFamily::Storage::dense);
    CHECK_THROWS_AS(validate_model(jm), Error);
}
