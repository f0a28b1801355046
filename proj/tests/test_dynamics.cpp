#include "jumpctl/dynamics.hpp"
#include "jumpctl/lq.hpp"

#include <doctest.h>

#include <cmath>

using namespace jumpctl;

namespace {

SimConfig base_config(int paths)
{
    SimConfig c;
    c.x0 = Vec::Constant(1, 0.5);
    c.T = 1.0;
    c.dt = 1e-2;
    c.n_paths = paths;
    c.seed = 99;
    c.lambda_max = 2.0;
    c.record_every = 10;
    return c;
}

Action jumpy()
{
    return Action::scalar(0.7, JumpMeasure::atomic_1d({{0.6, 1.0}, {-1.5, 0.5}}), 0.2);
}

}  // namespace

TEST_CASE("terminal mean and variance of a constant-action process")
{
    // X_T = x0 + mu T + sigma W_T + compensated jumps
    const SimConfig cfg = base_config(40000);
    const PathBundle b = simulate(PolicyField::constant(jumpy()), cfg);
    const int last = b.n_records - 1;
    std::vector<double> xs(b.n_paths);
    for (int p = 0; p < b.n_paths; ++p)
        xs[p] = b.x(p, last)[0];
    const auto [m, se] = mean_se(xs);
    const double var = 0.49 + (0.36 + 0.5 * 2.25);
    CHECK(std::abs(m - (0.5 + 0.2)) <= 4.0 * se);
    CHECK(se == doctest::Approx(std::sqrt(var / b.n_paths)).epsilon(0.05));
}

TEST_CASE("serial and parallel simulation are bit-identical")
{
    SimConfig cfg = base_config(3000);
    cfg.record_characteristics = true;
    cfg.jump_bin_edges = {-2.0, 0.0, 2.0};
    PathFunctionals fn;
    fn.f = [](const Vec& x, const Action&) { return x[0] * x[0]; };
    fn.q = [](const Vec&, const Action&) { return 0.5; };
    cfg.exec = Execution::Parallel;
    const PathBundle a = simulate(PolicyField::constant(jumpy()), cfg, fn);
    cfg.exec = Execution::Serial;
    const PathBundle b = simulate(PolicyField::constant(jumpy()), cfg, fn);
    CHECK(a.state == b.state);
    CHECK(a.running_cost == b.running_cost);
    CHECK(a.jump_count == b.jump_count);
    CHECK(a.sup_jump == b.sup_jump);
    cfg.seed += 1;
    const PathBundle c = simulate(PolicyField::constant(jumpy()), cfg, fn);
    CHECK(a.state != c.state);
}

TEST_CASE("characteristics agree with their formulas")
{
    SimConfig cfg = base_config(20000);
    cfg.record_characteristics = true;
    cfg.jump_bin_edges = {-2.0, -1.0, 0.0, 1.0};
    const PathBundle b = simulate(PolicyField::constant(jumpy()), cfg);
    const CharacteristicsReport r = characteristics_report(b);
    CHECK(r.drift_max_gap < 1e-9);
    CHECK(r.covariation_mean(0, 0) == doctest::Approx(0.49).epsilon(1e-12));
    CHECK(r.compensator_mean == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(std::abs(r.jump_count_mean - r.compensator_mean) <= 4.0 * r.jump_count_se);
    CHECK(r.max_abs_z < 4.0);
    REQUIRE(r.bin_expected.size() == 3);
    CHECK(r.bin_expected[0] == doctest::Approx(0.5));
    CHECK(r.bin_expected[1] == doctest::Approx(0.0));
    CHECK(r.bin_expected[2] == doctest::Approx(1.0));
}

TEST_CASE("integrands and discount are integrated along the path")
{
    SimConfig cfg = base_config(200);
    PathFunctionals fn;
    fn.q = [](const Vec&, const Action&) { return 0.3; };
    fn.f = [](const Vec&, const Action&) { return 1.0; };
    fn.integrands = {[](const Vec&, const Action&) { return 2.0; }};
    const PathBundle b = simulate(PolicyField::constant(jumpy()), cfg, fn);
    for (int p = 0; p < b.n_paths; p += 37)
        for (int r = 0; r < b.n_records; ++r) {
            const double t = b.times[r];
            CHECK(b.gamma[b.at(p, r)] == doctest::Approx(0.3 * t));
            CHECK(b.integrals[b.at(p, r)] == doctest::Approx(2.0 * t));
            CHECK(b.running_cost[b.at(p, r)] == doctest::Approx((1.0 - std::exp(-0.3 * t)) / 0.3).epsilon(1e-5));
        }
}

TEST_CASE("jump intensity above the thinning bound is an error")
{
    SimConfig cfg = base_config(10);
    cfg.lambda_max = 1.0;
    CHECK_THROWS_AS(simulate(PolicyField::constant(jumpy()), cfg), Error);
    cfg.lambda_max = 0.0;
    CHECK_THROWS_AS(simulate(PolicyField::constant(jumpy()), cfg), Error);
    cfg.lambda_max = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(simulate(PolicyField::constant(jumpy()), cfg), UnsupportedMeasureError);
}

TEST_CASE("growth certificate violations throw or are recorded")
{
    const PolicyField pol =
        PolicyField::affine_drift(Action::scalar(1.0, JumpMeasure::zero(1), 0.0), Mat::Constant(1, 1, 0.0),
                                  Vec::Constant(1, 50.0))
            .with_certificate({1.0, 2.0});
    SimConfig cfg = base_config(50);
    CHECK_THROWS_AS(simulate(pol, cfg), AdmissibilityError);
    cfg.on_violation = ViolationPolicy::Record;
    const PathBundle b = simulate(pol, cfg);
    CHECK(b.violated[0] == 1);
}

TEST_CASE("optimal LQ payoff matches the closed-form value")
{
    const LQSolution sol = solve_lq(LQSpec::scalar(1.0, 1.0, 1.0, 0.5));
    SimConfig cfg;
    cfg.x0 = Vec::Constant(1, 1.0);
    cfg.T = 12.0;
    cfg.dt = 1e-2;
    cfg.n_paths = 4000;
    cfg.seed = 5;
    cfg.record_every = 100;
    cfg.u = sol.u;
    const PayoffEstimate e = payoff_estimate(sol.policy(), cfg, sol.cost(), sol.discount(), 1.0);
    const double V = sol.value(cfg.x0);
    CHECK(e.tail_bound >= 0.0);
    CHECK(e.estimate <= V + 4.0 * e.std_error + 0.01 * V);
    CHECK(e.estimate + e.tail_bound >= V - 4.0 * e.std_error - 0.01 * V);
}

TEST_CASE("Bellman series starts at phi(x0)")
{
    const LQSolution sol = solve_lq(LQSpec::scalar(1.0, 1.0, 1.0));
    SimConfig cfg = base_config(100);
    PathFunctionals fn;
    fn.f = sol.cost();
    fn.q = sol.discount();
    const PathBundle b = simulate(sol.policy(), cfg, fn);
    const BellmanSeries S = bellman_series(sol.value_field(), b);
    CHECK(S.S.rows() == 100);
    for (int p = 0; p < 100; ++p)
        CHECK(S.S(p, 0) == doctest::Approx(sol.value(cfg.x0)));
}

TEST_CASE("sample mean and standard error")
{
    const auto [m, se] = mean_se({1.0, 2.0, 3.0, 4.0});
    CHECK(m == 2.5);
    CHECK(se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}
