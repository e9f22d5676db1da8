#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "qdyn/models.hpp"
#include "qdyn/tcl.hpp"

using namespace qdyn;

namespace {

Operator sigma_minus()
{
    Operator s = Operator::Zero(2, 2);
    s(1, 0) = 1.0;
    return s;
}

// exact semigroup family e^{(t-s) L} from matrix exponentials
TwoParamFamily exponential_family(const SuperOp& l, const TimeGrid& g)
{
    std::vector<SuperOp> vals;
    vals.reserve(g.n + 1);
    for (int m = 0; m <= g.n; ++m) {
        vals.emplace_back(l.dim, (m * g.h * l.mat).exp().eval());
    }
    return TwoParamFamily::homogeneous(g, std::move(vals));
}

SuperOp damping_generator(double gamma)
{
    const GKLSSpec spec =
        GKLSSpec::constant(Operator::Zero(2, 2), {{gamma, sigma_minus()}});
    return build_generator(spec, 0.0);
}

} // namespace

TEST_CASE("extraction from an exponential family recovers the generator")
{
    const SuperOp l = damping_generator(1.0);
    const TimeGrid g(0.0, 1.0 / 64, 64);
    const TwoParamFamily fam = exponential_family(l, g);
    const TCLFamily tcl = extract_tcl(fam, 0);
    REQUIRE(tcl.complete());
    double defect = 0.0;
    for (int m = 0; m <= g.n; ++m) {
        defect = std::max(defect, (tcl.values[m]->mat - l.mat).norm());
    }
    CHECK(defect < 20.0 * g.h * g.h);
}

TEST_CASE("constant identity family extracts to zero generators")
{
    const TimeGrid g(0.0, 0.125, 8);
    const TwoParamFamily fam =
        TwoParamFamily::homogeneous(OneParamFamily::constant(g, SuperOp::identity(2)));
    const TCLFamily tcl = extract_tcl(fam, 0);
    REQUIRE(tcl.complete());
    for (int m = 0; m <= g.n; ++m) {
        CHECK(tcl.values[m]->mat.norm() < 1e-12);
    }
}

TEST_CASE("zero generators integrate to the identity column")
{
    const TimeGrid g(0.0, 0.125, 8);
    TCLFamily tcl;
    tcl.grid = g;
    tcl.t0_index = 0;
    tcl.values.assign(g.n + 1, SuperOp::zero(2));
    tcl.condition_log.assign(g.n + 1, 1.0);
    const TwoParamFamily col = integrate_tcl(tcl);
    for (int i = 0; i <= g.n; ++i) {
        CHECK((col.at(i, 0).mat - Eigen::MatrixXcd::Identity(4, 4)).norm() < 1e-14);
    }
}

TEST_CASE("extract/integrate roundtrip on the damping family")
{
    const SuperOp l = damping_generator(1.0);
    const TimeGrid g(0.0, 1.0 / 128, 128);
    const TwoParamFamily fam = exponential_family(l, g);
    const TwoParamFamily re = integrate_tcl(extract_tcl(fam, 0));
    double defect = 0.0;
    for (int i = 0; i <= g.n; ++i) {
        defect = std::max(defect, (re.at(i, 0).mat - fam.at(i, 0).mat).norm());
    }
    CHECK(defect < 10.0 * g.h * g.h);
}

TEST_CASE("composition defect of an exact semigroup family is tiny")
{
    const SuperOp l = damping_generator(1.0);
    const TimeGrid g(0.0, 1.0 / 16, 16);
    const TwoParamFamily fam = exponential_family(l, g);
    CHECK(composition_defect(fam) < 1e-10);
}

TEST_CASE("gamma2 semi-Markov family is non-Markovian on the grid")
{
    Waiting w;
    w.kind = Waiting::Kind::gamma2;
    w.kappa = 1.0;
    const int steps = 128;
    const TimeGrid g(0.0, 1.0 / steps, steps);
    const JumpModel jm = model_semi_markov(w, depolarizing_channel(2)).build(g);
    const SeriesResult res = series_homogeneous(jm);
    CHECK(composition_defect(res.total) > 10.0 * g.h * g.h);
}

TEST_CASE("propagators compose exactly for a shared base point")
{
    const SuperOp l = damping_generator(0.7);
    const TimeGrid g(0.0, 0.1, 10);
    const TwoParamFamily fam = exponential_family(l, g);
    const SuperOp v_ts = propagator(fam, 8, 5, 0);
    const SuperOp v_su = propagator(fam, 5, 2, 0);
    const SuperOp v_tu = propagator(fam, 8, 2, 0);
    CHECK((v_ts.mat * v_su.mat - v_tu.mat).norm() < 1e-10);
    CHECK((propagator(fam, 4, 4, 0).mat - Eigen::MatrixXcd::Identity(4, 4)).norm() < 1e-12);
}

TEST_CASE("propagators of the gamma2 family depend on the base point")
{
    Waiting w;
    w.kind = Waiting::Kind::gamma2;
    w.kappa = 1.0;
    const int steps = 128;
    const TimeGrid g(0.0, 1.0 / steps, steps);
    const JumpModel jm = model_semi_markov(w, depolarizing_channel(2)).build(g);
    const SeriesResult res = series_homogeneous(jm);

    // V_{t,s} built from base t0 = 0 versus t0 = s
    double defect = 0.0;
    const int i = steps, j = steps / 2;
    const SuperOp a = propagator(res.total, i, j, 0);
    const SuperOp b = propagator(res.total, i, j, j);
    defect = (a.mat - b.mat).norm();
    CHECK(defect > 10.0 * g.h * g.h);
}

TEST_CASE("nodes with singular maps are skipped and logged")
{
    const TimeGrid g(0.0, 0.125, 8);
    // identity on the diagonal but zero above it: every off-diagonal node of
    // the base column is singular
    const TwoParamFamily fam = TwoParamFamily::dense_identity_diag(g, 2);
    const TCLFamily tcl = extract_tcl(fam, 0);
    CHECK(!tcl.complete());
    CHECK(tcl.values[0].has_value());
    CHECK(!tcl.values[1].has_value());
    CHECK(tcl.condition_log[1] > 1e8);
    CHECK_THROWS_AS(integrate_tcl(tcl), Error);
}
