#pragma once

#include "jumpctl/generator.hpp"
#include "jumpctl/measures.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace jumpctl {

/// State- and action-dependent scalar such as a running cost f(x, a) or a
/// discount rate q(x, a).
using CostFn = std::function<double(const Vec& x, const Action& a)>;

/// Growth bound |mu|^p + |sigma|^p + int |z|^2 v |z|^p nu(dz) <= K (1 + |x|^p).
struct GrowthCertificate {
    double K = 1.0;
    double p = 2.0;
};

/// Left side of the growth bound for one action.
double growth_lhs(const Action& a, double p);

/// Stationary Markov control x -> Action.
class PolicyField {
public:
    using Map = std::function<Action(const Vec&)>;
    using IdMap = std::function<int(const Vec&)>;

    static PolicyField constant(Action a, std::string name = "constant");
    /// Base action with drift replaced by gain * x + offset.
    static PolicyField affine_drift(Action base, Mat gain, Vec offset, std::string name = "affine");
    /// General map; measure_varies = false promises that sigma and nu never change with x.
    static PolicyField feedback(int dim, Map map, std::string name = "feedback", bool measure_varies = true);

    PolicyField with_certificate(GrowthCertificate c) const;
    PolicyField with_ids(IdMap ids) const;

    int dim() const { return dim_; }
    const std::string& name() const { return name_; }
    bool is_constant() const { return kind_ == Kind::Constant; }
    bool measure_varies() const { return kind_ == Kind::General && measure_varies_; }
    const std::optional<GrowthCertificate>& certificate() const { return cert_; }

    /// Writes the action at x into `out`, reusing its storage where possible.
    void eval(const Vec& x, Action& out) const;
    Action operator()(const Vec& x) const;
    int action_id(const Vec& x) const { return ids_ ? ids_(x) : 0; }

private:
    enum class Kind { Constant, Affine, General };
    Kind kind_ = Kind::Constant;
    int dim_ = 1;
    std::string name_;
    Action base_;
    Mat gain_;
    Vec offset_;
    Map map_;
    IdMap ids_;
    bool measure_varies_ = true;
    std::optional<GrowthCertificate> cert_;
};

enum class ViolationPolicy { Throw, Record };

struct SimConfig {
    Vec x0;
    double T = 1.0;
    double dt = 1e-2;
    int n_paths = 1000;
    std::uint64_t seed = 0;
    double lambda_max = 0.0;  // thinning bound on nu(x, R^n)
    int record_every = 1;     // record the state every this many steps
    bool record_characteristics = false;
    Vec u;                    // empty means zero
    double p = 2.0;           // moment order for the admissibility integrand Q
    std::vector<double> moment_orders{2.0, 4.0};
    std::vector<double> jump_bin_edges;  // histogram of the first jump coordinate
    ViolationPolicy on_violation = ViolationPolicy::Throw;
    Execution exec = Execution::Parallel;
};

/// Optional quantities integrated or sampled along each path.
struct PathFunctionals {
    CostFn f;  // running cost; null means 0
    CostFn q;  // discount rate; null means 0
    std::vector<CostFn> integrands;  // integral over [0, t] recorded (trapezoid rule)
    std::vector<std::function<double(const Vec&)>> observables;
};

/// Monte Carlo ensemble on a recording lattice. Arrays are flat, path-major:
/// entry (path, r) of a k-vector quantity starts at (path * n_records + r) * k.
struct PathBundle {
    int n_paths = 0;
    int n_records = 0;
    int dim = 1;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> times;

    std::vector<double> state;        // dim
    std::vector<int> action_id;       // 1
    std::vector<double> gamma;        // 1, integral of q
    std::vector<double> running_cost; // 1, integral of exp(-gamma) f
    std::vector<double> cost_rate;    // 1, f at the record time
    int n_integrands = 0;
    std::vector<double> integrals;    // n_integrands
    int n_observables = 0;
    std::vector<double> observables;  // n_observables

    bool has_characteristics = false;
    std::vector<double> moment_orders;
    std::vector<double> jump_bin_edges;
    std::vector<double> drift_observed;  // dim, B^h read off the path decomposition
    std::vector<double> drift_formula;   // dim, integral of (u + mu) - (y - h(y)) nu
    std::vector<double> covariation;     // dim * dim, integral of sigma sigma^T
    std::vector<double> cont_part;       // dim, continuous martingale part
    std::vector<double> jump_part;       // dim, compensated jump martingale
    std::vector<double> sup_cont;        // 1, running sup |X^c|
    std::vector<double> sup_jump;        // 1, running sup |X^d|
    std::vector<double> jump_count;      // 1
    std::vector<double> compensator_mass;// 1, integral of nu(R^n)
    std::vector<double> sigma_energy;    // 1, integral of |sigma|^2
    std::vector<double> jump_energy;     // 1, G: integral of int |y|^2 nu
    std::vector<double> big_jump_moment; // moment_orders.size(), H_q
    std::vector<double> admissibility;   // 1, integral of Q^p
    std::vector<double> hist_observed;   // per path, bins
    std::vector<double> hist_expected;   // per path, bins

    std::vector<char> violated;  // growth certificate left on this path
    std::vector<char> diverged;  // state became non-finite

    Eigen::Map<const Vec> x(int path, int r) const
    {
        return Eigen::Map<const Vec>(state.data() + (static_cast<std::size_t>(path) * n_records + r) * dim, dim);
    }
    std::size_t at(int path, int r) const { return static_cast<std::size_t>(path) * n_records + r; }
    int bins() const { return jump_bin_edges.size() < 2 ? 0 : static_cast<int>(jump_bin_edges.size()) - 1; }
};

PathBundle simulate(const PolicyField& policy, const SimConfig& cfg, const PathFunctionals& fn = {});

enum class TailMode { Truncate, Bound };

struct PayoffEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    double tail_bound = 0.0;  // bound on the discounted cost beyond T
    double growth_rate = 0.0; // fitted exponential rate of E[f(X_t)] on the second half of [0, T]
    int n_paths = 0;
};

/// Discounted cost over [0, T] with a bound on the remainder; q_lower is the
/// positive lower bound of the discount rate.
PayoffEstimate payoff_estimate(const PolicyField& policy, const SimConfig& cfg, const CostFn& f, const CostFn& q,
                               double q_lower, TailMode tail = TailMode::Bound);
PayoffEstimate payoff_from_bundle(const PathBundle& bundle, double q_lower, TailMode tail = TailMode::Bound);

struct BellmanSeries {
    std::vector<double> times;
    Mat S;       // paths x records
    Mat anchor;  // first state coordinate, paths x records
};

/// S_t = int_0^t exp(-gamma) f ds + exp(-gamma_t) phi(X_t) on the record lattice.
BellmanSeries bellman_series(const ScalarField& phi, const PathBundle& bundle);

struct CharacteristicsReport {
    int n_paths = 0;
    double T = 0.0;
    Vec drift_observed_mean;
    Vec drift_formula_mean;
    double drift_max_gap = 0.0;     // max over paths of |B^h observed - formula|
    Mat covariation_mean;
    double covariation_min_eig = 0.0;
    double jump_count_mean = 0.0;
    double jump_count_se = 0.0;
    double compensator_mean = 0.0;
    std::vector<double> bin_edges;
    std::vector<double> bin_observed;  // mean count per path
    std::vector<double> bin_expected;  // mean compensator per path
    std::vector<double> bin_z;         // (observed - expected) / SE
    double max_abs_z = 0.0;
};

CharacteristicsReport characteristics_report(const PathBundle& bundle);

/// Sample mean and standard error.
std::pair<double, double> mean_se(const std::vector<double>& v);

}  // namespace jumpctl
