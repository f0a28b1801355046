#include "jumpctl/lq.hpp"
#include "jumpctl/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace jumpctl;

namespace {

// Synthetic Bellman series: random-walk increments with drift `slope` per unit time.
BellmanSeries walk(int paths, double slope, std::uint64_t seed, bool tied_anchor = false)
{
    BellmanSeries s;
    s.times = {0.0, 0.5, 1.0, 1.5, 2.0};
    const int R = static_cast<int>(s.times.size());
    s.S = Mat::Zero(paths, R);
    s.anchor = Mat::Zero(paths, R);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    for (int p = 0; p < paths; ++p) {
        double x = tied_anchor ? 1.0 : g(rng);
        s.anchor(p, 0) = x;
        for (int r = 1; r < R; ++r) {
            x += std::sqrt(0.5) * g(rng);
            s.anchor(p, r) = x;
            s.S(p, r) = s.S(p, r - 1) + slope * 0.5 + std::sqrt(0.5) * g(rng);
        }
    }
    return s;
}

const std::vector<std::pair<int, int>> kPairs{{0, 2}, {1, 3}, {2, 4}};

}  // namespace

TEST_CASE("martingale series passes both modes")
{
    const BellmanSeries s = walk(20000, 0.0, 1);
    const TestReport m = submartingale_test(s, kPairs, MartingaleMode::Martingale);
    const TestReport sub = submartingale_test(s, kPairs, MartingaleMode::Submartingale);
    CHECK(m.pass);
    CHECK(sub.pass);
    CHECK(m.stats.size() == 30);
    for (const auto& st : m.stats)
        CHECK(st.n == 2000);
}

TEST_CASE("upward drift is a submartingale but not a martingale")
{
    const BellmanSeries s = walk(20000, 0.3, 2);
    CHECK(submartingale_test(s, kPairs, MartingaleMode::Submartingale).pass);
    const TestReport m = submartingale_test(s, kPairs, MartingaleMode::Martingale);
    CHECK_FALSE(m.pass);
    CHECK(m.failures() == 30);
}

TEST_CASE("downward drift fails the submartingale test")
{
    const BellmanSeries s = walk(20000, -0.3, 3);
    CHECK_FALSE(submartingale_test(s, kPairs, MartingaleMode::Submartingale).pass);
}

TEST_CASE("tied anchors never straddle a bin edge")
{
    const BellmanSeries s = walk(5000, 0.0, 4, true);
    const TestReport r = submartingale_test(s, {{0, 2}}, MartingaleMode::Martingale);
    REQUIRE(r.stats.size() == 1);
    CHECK(r.stats[0].n == 5000);
}

TEST_CASE("undersampled bins are excluded from the decision")
{
    const BellmanSeries s = walk(2000, 5.0, 5);
    BinningOptions opt;
    opt.n_bins = 100;
    const TestReport r = submartingale_test(s, {{0, 1}}, MartingaleMode::Martingale, opt);
    CHECK_FALSE(r.pass);
    REQUIRE_FALSE(r.notes.empty());
    for (const auto& st : r.stats)
        CHECK(st.excluded);
    CHECK_THROWS_AS(submartingale_test(walk(999, 0.0, 6), kPairs, MartingaleMode::Martingale), Error);
    CHECK_THROWS_AS(submartingale_test(s, {{2, 1}}, MartingaleMode::Martingale), Error);
}

TEST_CASE("record index picks the nearest time")
{
    const std::vector<double> t{0.0, 0.1, 0.2, 0.3};
    CHECK(record_index(t, 0.19) == 2);
    CHECK(record_index(t, 5.0) == 3);
    CHECK_THROWS_AS(record_index({}, 0.0), Error);
}

TEST_CASE("transversality separates decaying and non-decaying discounted values")
{
    const LQSolution sol = solve_lq(LQSpec::scalar(1.0, 1.0, 1.0));
    const std::vector<double> times{0, 0.5, 1, 1.5, 2, 2.5, 3};
    SimConfig cfg;
    cfg.x0 = Vec::Constant(1, 1.0);
    cfg.dt = 1e-2;
    cfg.n_paths = 5000;
    cfg.seed = 1;
    cfg.record_every = 10;
    TransversalityFit fit;
    const TestReport ok = transversality_test(sol.policy(), sol.value_field(), times, cfg, sol.discount(), &fit);
    CHECK(ok.pass);
    CHECK(fit.rate > 0.5);
    CHECK(ok.notes.front().find("sufficient, not equivalent") != std::string::npos);
    // phi = exp(x) under driftless Brownian motion with q = 1/2: E[e^{-t/2} e^{B_t}] is constant
    const ScalarField e = ScalarField::analytic(1, [](const Vec& x) { return std::exp(x[0]); });
    const PolicyField bm = PolicyField::constant(Action::scalar(1.0, JumpMeasure::zero(1), 0.0));
    cfg.n_paths = 20000;
    const TestReport bad =
        transversality_test(bm, e, times, cfg, [](const Vec&, const Action&) { return 0.5; }, &fit);
    CHECK_FALSE(bad.pass);
    CHECK(std::abs(fit.rate) < 4.0 * fit.rate_se + 0.05);
    CHECK_THROWS_AS(transversality_test(bm, e, {0.0, 1.0}, cfg, {}), Error);
}

TEST_CASE("growth certificate check")
{
    const LQSolution sol = solve_lq(LQSpec::scalar(1.0, 1.0, 1.0, 0.5));
    const Vec lo = Vec::Constant(1, -20.0), hi = Vec::Constant(1, 20.0);
    CHECK(growth_certificate_check(sol.policy(), lo, hi, 101, sol.growth_constant(), 2.0).pass);
    CHECK_FALSE(growth_certificate_check(sol.policy(), lo, hi, 101, 0.1, 2.0).pass);
    // constant drift is not bounded by K(1 + |x|^p) for small K near the origin
    const PolicyField c = PolicyField::constant(Action::scalar(0.0, JumpMeasure::zero(1), 3.0));
    CHECK_FALSE(growth_certificate_check(c, lo, hi, 11, 1.0, 2.0).pass);
    CHECK(growth_certificate_check(c, lo, hi, 11, 9.0, 2.0).pass);
}

TEST_CASE("h2 check flags recorded certificate violations")
{
    const LQSolution sol = solve_lq(LQSpec::scalar(1.0, 1.0, 1.0));
    SimConfig cfg;
    cfg.x0 = Vec::Constant(1, 2.0);
    cfg.T = 1.0;
    cfg.n_paths = 500;
    cfg.record_every = 10;
    cfg.record_characteristics = true;
    const TestReport ok = h2_integrability_check(simulate(sol.policy(), cfg), 2.0);
    CHECK(ok.pass);
    cfg.on_violation = ViolationPolicy::Record;
    const PolicyField tight = sol.policy().with_certificate({0.01, 2.0});
    const TestReport bad = h2_integrability_check(simulate(tight, cfg), 2.0);
    CHECK_FALSE(bad.pass);
    cfg.record_characteristics = false;
    CHECK_THROWS_AS(h2_integrability_check(simulate(sol.policy(), cfg), 2.0), Error);
}

TEST_CASE("Dynkin test on Brownian motion with a quadratic test function")
{
    const PolicyField bm = PolicyField::constant(Action::scalar(1.0, JumpMeasure::atomic_1d({{0.4, 1.0}}), 0.2));
    const ScalarField g = ScalarField::analytic(
        1, [](const Vec& x) { return x[0] * x[0]; }, [](const Vec& x) -> Vec { return 2.0 * x; },
        [](const Vec&) -> Mat { return Mat::Constant(1, 1, 2.0); }, 2);
    SimConfig cfg;
    cfg.x0 = Vec::Constant(1, 0.5);
    cfg.dt = 1e-2;
    cfg.n_paths = 20000;
    cfg.seed = 77;
    cfg.lambda_max = 1.0;
    cfg.record_every = 25;
    const TestReport r = dynkin_test(bm, {g}, {0.5, 1.0}, cfg);
    CHECK(r.pass);
    CHECK(r.stats.size() == 2);
}

TEST_CASE("moment ratio for a compound Poisson process without diffusion")
{
    // single atom y = 2 at rate 1: X^d_t = 2 (N_t - t), G_t = 4 t, H_2 = 4 t
    const PolicyField cp = PolicyField::constant(Action::scalar(0.0, JumpMeasure::atomic_1d({{2.0, 1.0}}), 0.0));
    SimConfig cfg;
    cfg.x0 = Vec::Zero(1);
    cfg.T = 2.0;
    cfg.dt = 1e-2;
    cfg.n_paths = 20000;
    cfg.seed = 10;
    cfg.lambda_max = 1.0;
    cfg.record_every = 100;
    cfg.record_characteristics = true;
    cfg.moment_orders = {2.0};
    const PathBundle b = simulate(cp, cfg);
    const auto pts = moment_bound_ratio(b, 2.0);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].denominator == doctest::Approx(8.0));
    CHECK(pts[1].denominator == doctest::Approx(16.0));
    // E[X_T^2] = 4T <= E[sup X^2] <= 16 T (Doob)
    for (const auto& p : pts) {
        CHECK(p.numerator >= 4.0 * p.t - 4.0 * p.numerator_se);
        CHECK(p.numerator <= 16.0 * p.t);
    }
    CHECK_THROWS_AS(moment_bound_ratio(b, 3.0), Error);
}
