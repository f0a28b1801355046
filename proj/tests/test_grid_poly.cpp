#include "jumpctl/grid.hpp"
#include "jumpctl/polynomial.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace jumpctl;

TEST_CASE("node index round trips in two dimensions")
{
    const Grid g = Grid::box({-1.0, 1.0, 17}, {0.0, 3.0, 21});
    CHECK(g.size() == 17 * 21);
    for (int i = 0; i < g.size(); i += 7) {
        CHECK(g.node_index(g.multi_index(i)) == i);
        CHECK(g.contains(g.point(i)));
    }
    CHECK(g.point(0)[0] == -1.0);
    CHECK(g.point(g.size() - 1)[1] == 3.0);
    CHECK(g.boundary_depth(0) == 0);
    CHECK(g.boundary_depth(g.node_index({8, 10})) == 8);
    CHECK_THROWS_AS(Grid::line(0.0, 1.0, 8), Error);
    CHECK_THROWS_AS(Grid::line(1.0, 1.0, 32), Error);
}

TEST_CASE("tail extension reproduces polynomials up to its degree")
{
    const Grid g = Grid::line(-2.0, 3.0, 101);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int deg = 0; deg <= 3; ++deg) {
        const TailExtension ext(g, deg);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> c(deg + 1);
            for (auto& v : c)
                v = coef(rng);
            const Poly p(c);
            Vec vals(g.size());
            for (int i = 0; i < g.size(); ++i)
                vals[i] = p(g.point(i)[0]);
            for (double x : {-7.0, -2.5, 4.0, 9.5}) {
                const double got = apply_stencil(ext.stencil(Vec::Constant(1, x)), vals);
                CHECK(got == doctest::Approx(p(x)).epsilon(1e-9).scale(1.0));
            }
        }
    }
}

TEST_CASE("interior stencils interpolate linearly")
{
    const Grid g = Grid::line(0.0, 1.0, 21);
    const TailExtension ext(g, 2);
    const Stencil s = ext.stencil(Vec::Constant(1, 0.125));
    double wsum = 0.0;
    for (const auto& [i, w] : s)
        wsum += w;
    CHECK(wsum == doctest::Approx(1.0));
    Vec lin(g.size());
    for (int i = 0; i < g.size(); ++i)
        lin[i] = 3.0 * g.point(i)[0] - 1.0;
    CHECK(apply_stencil(s, lin) == doctest::Approx(3.0 * 0.125 - 1.0));
}

TEST_CASE("value field reports the growth of its tails")
{
    const Grid g = Grid::line(-5.0, 5.0, 201);
    Vec quad(g.size()), cubic(g.size());
    for (int i = 0; i < g.size(); ++i) {
        const double x = g.point(i)[0];
        quad[i] = x * x + 1.0;
        cubic[i] = x * x * x + x;
    }
    const ValueField fq(g, quad, 2);
    CHECK(fq.effective_tail_degree() == 2);
    CHECK(fq.tail_residual() < 1e-10);
    CHECK(fq(Vec::Constant(1, 8.0)) == doctest::Approx(65.0));
    CHECK(fq.nonnegative());
    const ValueField fc(g, cubic, 3);
    CHECK(fc.effective_tail_degree() == 3);
    CHECK_THROWS_AS(ValueField(g, Vec::Zero(3), 2), Error);
}

TEST_CASE("polynomial arithmetic")
{
    const Poly p({1.0, -2.0, 0.0, 4.0});
    CHECK(p.degree() == 3);
    CHECK(p(2.0) == doctest::Approx(1.0 - 4.0 + 32.0));
    CHECK(p.derivative()(2.0) == doctest::Approx(-2.0 + 48.0));
    CHECK((p - p).degree() <= 0);
    CHECK((p * 2.0)(1.0) == doctest::Approx(6.0));
    CHECK(Poly({1.0, 0.0, 3.0}).even());
    CHECK_FALSE(p.even());
    CHECK(Poly::monomial(4, 2.0)(1.5) == doctest::Approx(2.0 * std::pow(1.5, 4)));
}

TEST_CASE("resolvent particular solution solves aP - P''/2 = f")
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> coef(-1.0, 1.0), rate(0.2, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> c(1 + trial % 7);
        for (auto& v : c)
            v = coef(rng);
        const Poly f(c);
        const double a = rate(rng);
        const Poly P = resolvent_particular(f, a);
        CHECK(P.degree() == f.degree());
        const Poly P2 = P.derivative().derivative();
        for (double x : {-3.0, -0.5, 0.0, 1.7, 4.0})
            CHECK(a * P(x) - 0.5 * P2(x) == doctest::Approx(f(x)).epsilon(1e-10).scale(1.0));
    }
    CHECK_THROWS_AS(resolvent_particular(Poly({1.0}), 0.0), Error);
}
