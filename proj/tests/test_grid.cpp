#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qdyn/grid.hpp"

using namespace qdyn;

namespace {

SuperOp scalar(double v)
{
    Eigen::MatrixXcd m(1, 1);
    m(0, 0) = v;
    return SuperOp(1, std::move(m));
}

// one-parameter scalar family from a callable
OneParamFamily scalar_family(const TimeGrid& g, double (*f)(double))
{
    std::vector<SuperOp> v;
    v.reserve(g.n + 1);
    for (int m = 0; m <= g.n; ++m) {
        v.push_back(scalar(f(m * g.h)));
    }
    return OneParamFamily(g, std::move(v));
}

Eigen::MatrixXcd random_mat(int n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = cpx(g(rng), g(rng));
        }
    }
    return m;
}

// smooth dense two-parameter family, polynomial in (t, s)
TwoParamFamily polynomial_family(const TimeGrid& g, int d, unsigned seed)
{
    std::vector<Eigen::MatrixXcd> coef;
    for (int k = 0; k < 6; ++k) {
        coef.push_back(random_mat(d * d, seed + k));
    }
    TwoParamFamily f = TwoParamFamily::dense_zero(g, d);
    for (int i = 0; i <= g.n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double t = g.node(i), s = g.node(j);
            f.cell(i, j).mat =
                coef[0] + t * coef[1] + s * coef[2] + t * t * coef[3] + s * s * coef[4]
                + t * s * coef[5];
        }
    }
    return f;
}

} // namespace

TEST_CASE("grid nodes and mismatch detection")
{
    const TimeGrid g(0.0, 0.25, 4);
    CHECK(g.node(4) == doctest::Approx(1.0));
    const TimeGrid g2(0.0, 0.5, 4);
    CHECK_THROWS_AS(check_same_grid(g, g2), GridMismatch);
}

TEST_CASE("convolution of constant scalars is t (trapezoid exact)")
{
    const TimeGrid g(0.0, 1.0 / 16, 16);
    const OneParamFamily one = OneParamFamily::constant(g, scalar(1.0));
    const OneParamFamily c = convolve_hom(one, one);
    for (int m = 0; m <= g.n; ++m) {
        CHECK(c.values[m].mat(0, 0).real() == doctest::Approx(m * g.h).epsilon(1e-13));
    }
}

TEST_CASE("convolution t * t = t^3/6 to second order")
{
    const TimeGrid g(0.0, 1.0 / 64, 64);
    auto id_t = [](double t) { return t; };
    const OneParamFamily f = scalar_family(g, id_t);
    const OneParamFamily c = convolve_hom(f, f);
    const double t = 1.0;
    const double exact = t * t * t / 6.0;
    CHECK(std::abs(c.values[64].mat(0, 0).real() - exact) < 10.0 * g.h * g.h);
}

TEST_CASE("homogeneous lift of convolution is bitwise equal to the dense path")
{
    const TimeGrid g(0.0, 1.0 / 32, 32);
    auto fa = [](double t) { return std::exp(-t); };
    auto fb = [](double t) { return std::cos(t); };
    const TwoParamFamily a = TwoParamFamily::homogeneous(scalar_family(g, fa));
    const TwoParamFamily b = TwoParamFamily::homogeneous(scalar_family(g, fb));

    const TwoParamFamily hom = convolve_inhom(a, b);
    const TwoParamFamily dense = convolve_inhom(densify(a), densify(b));
    REQUIRE(hom.is_homogeneous_storage());
    REQUIRE(!dense.is_homogeneous_storage());
    for (int i = 0; i <= g.n; ++i) {
        for (int j = 0; j <= i; ++j) {
            CHECK(hom.at(i, j).mat == dense.at(i, j).mat); // bitwise
        }
    }
}

TEST_CASE("convolution is bilinear")
{
    const TimeGrid g(0.0, 1.0 / 16, 16);
    const TwoParamFamily a = polynomial_family(g, 2, 100);
    const TwoParamFamily b = polynomial_family(g, 2, 200);
    const TwoParamFamily c = polynomial_family(g, 2, 300);
    TwoParamFamily bc = b;
    bc += c;
    TwoParamFamily lhs = convolve_inhom(a, bc);
    TwoParamFamily rhs = convolve_inhom(a, b);
    rhs += convolve_inhom(a, c);
    CHECK(sup_diff(lhs, rhs) < 1e-11);
}

TEST_CASE("associativity defect is second order in h")
{
    const auto defect_at = [](int steps) {
        const TimeGrid g(0.0, 1.0 / steps, steps);
        const TwoParamFamily a = polynomial_family(g, 2, 400);
        const TwoParamFamily b = polynomial_family(g, 2, 500);
        const TwoParamFamily c = polynomial_family(g, 2, 600);
        return associativity_defect(a, b, c);
    };
    const double d1 = defect_at(32);
    const double d2 = defect_at(64);
    CHECK(d1 / d2 > 3.2);
    CHECK(d1 / d2 < 4.8);
}

TEST_CASE("kernel star with a pure delta part is node-wise composition")
{
    const TimeGrid g(0.0, 0.1, 8);
    const TwoParamFamily b = polynomial_family(g, 2, 700);
    const SuperOp a(2, random_mat(4, 800));
    const KernelFamily k =
        KernelFamily::pure_delta_constant(g, a, TwoParamFamily::Storage::dense);
    const TwoParamFamily kb = convolve_kernel(k, b);
    for (int i = 0; i <= g.n; ++i) {
        for (int j = 0; j <= i; ++j) {
            CHECK((kb.at(i, j).mat - a.mat * b.at(i, j).mat).norm() == 0.0);
        }
    }
    const TwoParamFamily bk = convolve_kernel_right(b, k);
    for (int i = 0; i <= g.n; ++i) {
        for (int j = 0; j <= i; ++j) {
            CHECK((bk.at(i, j).mat - b.at(i, j).mat * a.mat).norm() == 0.0);
        }
    }
}

TEST_CASE("homogeneity defect vanishes exactly for lifted families")
{
    const TimeGrid g(0.0, 0.1, 10);
    auto fa = [](double t) { return std::sin(t) + 2.0; };
    const TwoParamFamily hom = TwoParamFamily::homogeneous(scalar_family(g, fa));
    CHECK(homogeneity_defect(densify(hom)) == 0.0);
}

TEST_CASE("column derivative is exact on quadratics")
{
    const TimeGrid g(0.0, 0.125, 8);
    TwoParamFamily f = TwoParamFamily::dense_zero(g, 1);
    for (int i = 0; i <= g.n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double t = g.node(i);
            f.cell(i, j).mat = scalar(3.0 * t * t - 2.0 * t + 1.0).mat;
        }
    }
    for (int j = 0; j <= g.n - 2; ++j) {
        for (int i = j; i <= g.n; ++i) {
            const double t = g.node(i);
            const double expect = 6.0 * t - 2.0;
            CHECK(std::abs(column_derivative(f, i, j)(0, 0).real() - expect) < 1e-10);
        }
    }
}

TEST_CASE("delta-kernel subtraction is componentwise")
{
    const TimeGrid g(0.0, 0.1, 4);
    const SuperOp a = scalar(2.0);
    const SuperOp b = scalar(0.5);
    KernelFamily ka = KernelFamily::pure_delta_constant(g, a, TwoParamFamily::Storage::homogeneous);
    KernelFamily kb = KernelFamily::pure_delta_constant(g, b, TwoParamFamily::Storage::homogeneous);
    const KernelFamily diff = ka - kb;
    REQUIRE(diff.has_delta());
    CHECK(diff.delta[0].mat(0, 0).real() == doctest::Approx(1.5));
}
