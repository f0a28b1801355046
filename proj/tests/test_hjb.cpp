#include "jumpctl/hjb.hpp"
#include "jumpctl/lq.hpp"

#include <doctest.h>

#include <cmath>

using namespace jumpctl;

namespace {

// One Brownian family, cost |x|^2, discount q: V = |x|^2 / q + n / q^2.
HJBProblem brownian(int dim, double q)
{
    HJBProblem p;
    p.dim = dim;
    p.actions.push_back(ActionFamily::constant("still", Action::make(Mat::Identity(dim, dim), JumpMeasure::zero(dim),
                                                                     Vec::Zero(dim))));
    p.f = [](const Vec& x, const Action&) { return x.squaredNorm(); };
    p.q = [q](const Vec&, const Action&) { return q; };
    p.q_lower = p.q_upper = q;
    return p;
}

}  // namespace

TEST_CASE("policy evaluation is exact for quadratic value functions")
{
    const double q = 0.5;
    const Grid grid = Grid::line(-5.0, 5.0, 201);
    const StationarySolution s = solve_stationary(brownian(1, q), grid);
    CHECK(s.report.converged);
    CHECK(s.report.nonmonotone_rows == 0);
    double err = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        const double x = grid.point(i)[0];
        err = std::max(err, std::abs(s.value.at(i) - (x * x / q + 1.0 / (q * q))));
    }
    CHECK(err < 1e-8);
    CHECK(s.value.effective_tail_degree() == 2);
}

TEST_CASE("two-dimensional problem above the dense limit uses the sparse path")
{
    const double q = 1.0;
    const Grid grid = Grid::box({-3.0, 3.0, 51}, {-3.0, 3.0, 51});
    REQUIRE(grid.size() > 2048);
    const StationarySolution s = solve_stationary(brownian(2, q), grid);
    double err = 0.0;
    for (int i = 0; i < grid.size(); ++i)
        err = std::max(err, std::abs(s.value.at(i) - (grid.point(i).squaredNorm() + 2.0)));
    CHECK(err < 1e-7);
}

TEST_CASE("ties go to the lowest action index")
{
    HJBProblem p = brownian(1, 1.0);
    p.actions.push_back(p.actions.front());
    p.actions.back().name = "twin";
    const StationarySolution s = solve_stationary(p, Grid::line(-3.0, 3.0, 61));
    for (int f : s.policy.family)
        CHECK(f == 0);
}

TEST_CASE("converged solution satisfies the discrete HJB equation")
{
    const LQSpec spec = LQSpec::scalar(1.0, 1.0, 2.0, 0.5);
    const DriftLattice lat{Vec::Constant(1, -3.0), Vec::Constant(1, 3.0), {61}};
    const HJBProblem prob = lq_problem(spec, lat);
    const Grid grid = Grid::line(-5.0, 5.0, 201);
    SolveOptions opt;
    opt.refine_drift = false;
    const StationarySolution s = solve_stationary(prob, grid, opt);
    REQUIRE(s.report.converged);
    double worst = 0.0;
    for (int i = 30; i < 170; i += 7) {
        const auto c = candidate_integrands(s.value.values(), prob, grid, i, opt);
        REQUIRE(static_cast<int>(c.size()) == lat.size());
        const double best = *std::min_element(c.begin(), c.end());
        worst = std::max(worst, std::abs(best));
        // the chosen lattice point attains the minimum
        CHECK(c[s.policy.lattice[i]] == doctest::Approx(best).epsilon(1e-9).scale(1.0));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("feedback from a policy table follows its drifts")
{
    const LQSpec spec = LQSpec::scalar(1.0, 1.0, 3.0, 1.0);
    const DriftLattice lat{Vec::Constant(1, -2.0), Vec::Constant(1, 2.0), {41}};
    const HJBProblem prob = lq_problem(spec, lat);
    const Grid grid = Grid::line(-4.0, 4.0, 161);
    const StationarySolution s = solve_stationary(prob, grid);
    const PolicyField fb = make_feedback(s.policy, prob);
    for (int i = 20; i < 140; i += 13)
        CHECK(fb(grid.point(i)).mu[0] == doctest::Approx(s.policy.mu(0, i)));
    CHECK(s.policy.same_as(s.policy));
}

TEST_CASE("finite horizon relaxes from terminal data to the stationary value")
{
    const double q = 1.0;
    const Grid grid = Grid::line(-4.0, 4.0, 161);
    const HJBProblem prob = brownian(1, q);
    const ScalarField zero = ScalarField::analytic(
        1, [](const Vec&) { return 0.0; }, [](const Vec&) -> Vec { return Vec::Zero(1); },
        [](const Vec&) -> Mat { return Mat::Zero(1, 1); }, 0);
    const FiniteHorizonSolution fh = solve_finite_horizon(prob, zero, grid, {10.0, 200, true});
    REQUIRE(fh.times.size() == 201);
    CHECK(fh.times.front() == 0.0);
    CHECK(fh.times.back() == doctest::Approx(10.0));
    CHECK(fh.values.back().values().isZero());
    // monotone in remaining time for nonnegative cost and zero terminal data
    for (std::size_t k = 1; k < fh.values.size(); ++k)
        CHECK((fh.values[k - 1].values().array() >= fh.values[k].values().array() - 1e-12).all());
    const int mid = grid.size() / 2;
    CHECK(fh.values.front().at(mid) == doctest::Approx(1.0 / (q * q)).epsilon(1e-3));
}

TEST_CASE("exponential fitting makes pure discounting exact")
{
    HJBProblem p = brownian(1, 0.8);
    p.f = [](const Vec&, const Action&) { return 0.0; };
    const ScalarField c = ScalarField::analytic(
        1, [](const Vec&) { return 3.0; }, [](const Vec&) -> Vec { return Vec::Zero(1); },
        [](const Vec&) -> Mat { return Mat::Zero(1, 1); }, 0);
    const Grid grid = Grid::line(-2.0, 2.0, 41);
    const auto fitted = solve_finite_horizon(p, c, grid, {2.0, 7, true});
    CHECK((fitted.values.front().values().array() - 3.0 * std::exp(-1.6)).abs().maxCoeff() < 1e-12);
    const auto plain = solve_finite_horizon(p, c, grid, {2.0, 7, false});
    CHECK(std::abs(plain.values.front().at(0) - 3.0 * std::exp(-1.6)) > 1e-3);
}

TEST_CASE("problem validation")
{
    HJBProblem p = brownian(1, 1.0);
    p.actions.clear();
    CHECK_THROWS_AS(p.validate(), Error);
    p = brownian(1, 1.0);
    p.q_lower = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = brownian(1, 1.0);
    p.actions.front().drift = DriftMode::Lattice;
    CHECK_THROWS_AS(p.validate(), Error);
    p = brownian(1, 1.0);
    p.q_growth = 4;
    CHECK_THROWS_AS(p.validate(), GrowthError);
    CHECK_THROWS_AS(solve_stationary(brownian(2, 1.0), Grid::line(-1.0, 1.0, 21)), Error);
}

TEST_CASE("DPP residual is near zero at the optimum and positive off it")
{
    const LQSolution sol = solve_lq(LQSpec::scalar(1.0, 1.0, 1.0));
    const DriftLattice lat{Vec::Constant(1, -3.0), Vec::Constant(1, 3.0), {31}};
    const HJBProblem prob = lq_problem(LQSpec::scalar(1.0, 1.0, 1.0), lat);
    SimConfig sim;
    sim.dt = 1e-2;
    sim.n_paths = 4000;
    sim.seed = 3;
    const std::vector<Vec> probes{Vec::Constant(1, 1.0)};
    const DppReport opt = dpp_residual(sol.value_field(), prob, {sol.policy(), sol.policy(0.5)}, probes, 0.5, sim);
    CHECK(opt.best_trial[0] == 0);
    CHECK(std::abs(opt.residual[0]) <= 4.0 * opt.std_error[0] + 1e-3);
    const DppReport off = dpp_residual(sol.value_field(), prob, {sol.policy(0.5)}, probes, 0.5, sim);
    CHECK(off.residual[0] > 0.0);
}
