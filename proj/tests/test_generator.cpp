#include "jumpctl/generator.hpp"

#include <doctest.h>

#include <cmath>

using namespace jumpctl;

namespace {

ScalarField square_1d()
{
    return ScalarField::analytic(
        1, [](const Vec& x) { return x[0] * x[0]; }, [](const Vec& x) -> Vec { return 2.0 * x; },
        [](const Vec&) -> Mat { return Mat::Constant(1, 1, 2.0); }, 2);
}

}  // namespace

TEST_CASE("generator of x^2 is 2(u+mu)x + sigma^2 + second moment")
{
    const JumpMeasure nu = JumpMeasure::atomic_1d({{0.7, 1.5}, {-2.0, 0.3}});
    const Action a = Action::scalar(0.8, nu, -0.4);
    const Vec u = Vec::Constant(1, 0.25);
    const double m2 = 1.5 * 0.49 + 0.3 * 4.0;
    for (double x : {-3.0, 0.0, 1.3}) {
        const Vec X = Vec::Constant(1, x);
        const double expected = 2.0 * (0.25 - 0.4) * x + 0.64 + m2;
        CHECK(apply_generator(a, square_1d(), X, u) == doctest::Approx(expected).epsilon(1e-12));
        // finite differences only: no exact derivatives supplied
        const ScalarField plain = ScalarField::analytic(1, [](const Vec& y) { return y[0] * y[0]; });
        CHECK(apply_generator(a, plain, X, u) == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("generator of exp against its closed form")
{
    const JumpMeasure nu = JumpMeasure::atomic_1d({{0.5, 1.0}, {-0.8, 0.5}});
    const Action a = Action::scalar(1.2, nu, 0.3);
    const ScalarField e = ScalarField::analytic(1, [](const Vec& x) { return std::exp(x[0]); });
    for (double x : {-1.0, 0.0, 2.0}) {
        const double ex = std::exp(x);
        double jumps = 0.0;
        for (const auto& [y, m] : {std::pair{0.5, 1.0}, std::pair{-0.8, 0.5}})
            jumps += m * (std::exp(x + y) - ex - y * ex);
        const double expected = 0.3 * ex + 0.5 * 1.44 * ex + jumps;
        CHECK(apply_generator(a, e, Vec::Constant(1, x), Vec()) == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("two-dimensional diffusion term is tr(sigma sigma^T H)/2")
{
    const ScalarField g = ScalarField::analytic(2, [](const Vec& x) { return x[0] * x[1] + 0.5 * x[1] * x[1]; });
    Mat sigma(2, 2);
    sigma << 1.0, 0.5, 0.0, 1.0;
    Mat H(2, 2);
    H << 0.0, 1.0, 1.0, 1.0;
    const double expected = 0.5 * (sigma * sigma.transpose() * H).trace();
    const Vec x = Vec::Constant(2, 0.7);
    CHECK(local_term(Vec::Zero(2), sigma, g, x, Vec()) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("grid field is exact for quadratics when jumps land on nodes")
{
    const Grid grid = Grid::line(-4.0, 4.0, 161);  // h = 0.05
    Vec vals(grid.size());
    for (int i = 0; i < grid.size(); ++i)
        vals[i] = grid.point(i)[0] * grid.point(i)[0];
    const ScalarField g = ScalarField::from_grid(ValueField(grid, vals, 2));
    const Action a = Action::scalar(1.0, JumpMeasure::atomic_1d({{0.05, 2.0}, {-0.5, 1.0}}), 0.2);
    for (int i : {40, 80, 120}) {
        const Vec x = grid.point(i);
        const double expected = 2.0 * 0.2 * x[0] + 1.0 + 2.0 * 0.0025 + 0.25;
        CHECK(apply_generator(a, g, x, Vec()) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("small-jump covariance enters as a diffusion")
{
    DensityLattice lat{Vec::Constant(1, -1.0), Vec::Constant(1, 1.0), {2}, {0.0, 0.0}, 0.0, Mat::Constant(1, 1, 0.3)};
    const JumpMeasure nu = JumpMeasure::density(lat);
    REQUIRE(nu.has_small_jump_cov());
    const Action a = Action::scalar(0.0, nu, 0.0);
    CHECK(apply_generator(a, square_1d(), Vec::Constant(1, 1.0), Vec()) == doctest::Approx(0.3));
}

TEST_CASE("growth beyond the moment order is refused")
{
    const ScalarField quartic = ScalarField::analytic(1, [](const Vec& x) { return std::pow(x[0], 4); }, {}, {}, 4);
    const JumpMeasure nu = JumpMeasure::atomic_1d({{1.0, 1.0}});
    GeneratorScheme s;
    s.moment_order = 2.0;
    CHECK_THROWS_AS(jump_term(nu, quartic, Vec::Zero(1), s), GrowthError);
    s.moment_order = 4.0;
    CHECK(jump_term(nu, quartic, Vec::Zero(1), s) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("restricted domain and field algebra")
{
    const ScalarField g = square_1d().with_domain(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
    CHECK(g(Vec::Constant(1, 0.5)) == 0.25);
    CHECK_THROWS_AS(g(Vec::Constant(1, 2.0)), DomainError);
    const ScalarField h = square_1d() + 3.0 * square_1d();
    CHECK(h(Vec::Constant(1, 2.0)) == doctest::Approx(16.0));
    CHECK(h.hessian(Vec::Zero(1))(0, 0) == doctest::Approx(8.0));
    CHECK(h.growth() == 2);
}

TEST_CASE("HJB integrand adds discount and cost")
{
    const Action a = Action::scalar(1.0, JumpMeasure::zero(1), 0.0);
    const Vec x = Vec::Constant(1, 2.0);
    CHECK(hjb_integrand(a, square_1d(), x, 5.0, 0.5, Vec()) == doctest::Approx(1.0 - 2.0 + 5.0));
}
