#pragma once

#include "jumpctl/dynamics.hpp"
#include "jumpctl/generator.hpp"

#include <string>
#include <utility>
#include <vector>

namespace jumpctl {

/// One recorded statistic and its decision.
struct Statistic {
    std::string label;
    double value = 0.0;
    double std_error = 0.0;
    double threshold = 0.0;
    long n = 0;
    bool pass = true;
    bool excluded = false;  // undersampled; not part of the decision
};

/// Outcome of a verifier. `pass` is the conjunction of the non-excluded
/// statistics plus any extra condition recorded in `notes`.
struct TestReport {
    std::string name;
    bool pass = true;
    std::vector<Statistic> stats;
    std::vector<std::string> notes;

    void add(Statistic s);
    int failures() const;
};

enum class MartingaleMode { Submartingale, Martingale };

struct BinningOptions {
    int n_bins = 10;
    int min_per_bin = 50;
    double z = 3.0;
    Execution exec = Execution::Parallel;
};

/// Bins paths by the anchor coordinate at record s (equal-count bins) and
/// tests the binwise mean of S_t - S_s: >= -z SE (submartingale) or
/// |mean| <= z SE (martingale). Requires at least 1000 paths.
TestReport submartingale_test(const BellmanSeries& S, const std::vector<std::pair<int, int>>& pairs,
                              MartingaleMode mode, const BinningOptions& opt = {});

/// Record index closest to time t.
int record_index(const std::vector<double>& times, double t);

struct TransversalityFit {
    std::vector<double> times;
    std::vector<double> mean;       // E[exp(-gamma_t) phi(X_t)]
    std::vector<double> std_error;
    double rate = 0.0;              // r in m(t) ~ A exp(-r t) on the second half
    double rate_se = 0.0;
    bool eventually_decreasing = false;
};

/// Discounted expectation of phi along the policy on the time lattice, a
/// weighted log-linear fit of its tail, and the decision: PASS iff m is
/// non-increasing (within z SE) on the second half of the lattice and
/// r - z SE(r) > 0. A sufficient check of the liminf condition only.
TestReport transversality_test(const PolicyField& policy, const ScalarField& phi, const std::vector<double>& times,
                               SimConfig cfg, const CostFn& q, TransversalityFit* fit = nullptr, double z = 3.0);

/// Pathwise integral of |mu| + |sigma|^2 + int |y|^2 v |y|^p nu over [0, T]
/// is finite on every path and its empirical (p/2)-moment is finite.
TestReport h2_integrability_check(const PathBundle& bundle, double p);

/// Growth bound left side <= K (1 + |x|^p) on a probe lattice over [lo, hi].
TestReport growth_certificate_check(const PolicyField& policy, const Vec& lo, const Vec& hi, int points_per_axis,
                                    double K, double p);

/// Dynkin increments g(X_t) - g(x0) - int_0^t L^a g(X_s) ds for each test
/// function at each time; every mean must lie within z SE of zero.
TestReport dynkin_test(const PolicyField& policy, const std::vector<ScalarField>& tests,
                       const std::vector<double>& times, SimConfig cfg, double z = 3.0);

struct MomentRatioPoint {
    double t = 0.0;
    double numerator = 0.0;     // E[sup_{s<=t} |X^d_s|^q]
    double numerator_se = 0.0;
    double denominator = 0.0;   // E[G_t^{q/2}] + E[H_t]
    double ratio = 0.0;
};

/// E[sup |X^d|^q] / (E[G^{q/2}] + E[H_q]) at every record time (skipping t = 0).
/// `q` must be one of the bundle's moment orders.
std::vector<MomentRatioPoint> moment_bound_ratio(const PathBundle& bundle, double q);

}  // namespace jumpctl
