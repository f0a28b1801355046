#pragma once

#include "jumpctl/dynamics.hpp"
#include "jumpctl/generator.hpp"
#include "jumpctl/grid.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace jumpctl {

enum class DriftMode {
    Fixed,       // mu as returned by the family
    Compensate,  // mu = integral of y nu(dy), cancelling the compensator drift
    Lattice      // mu ranges over the problem's drift lattice
};

/// One (sigma, nu) entry of the action set, possibly state dependent.
struct ActionFamily {
    std::string name;
    std::function<Action(const Vec&)> at;
    DriftMode drift = DriftMode::Fixed;

    static ActionFamily constant(std::string name, Action a, DriftMode drift = DriftMode::Fixed);
};

/// Tensor lattice of candidate drifts.
struct DriftLattice {
    Vec lo;
    Vec hi;
    std::vector<int> points;

    int size() const;
    int dim() const { return static_cast<int>(lo.size()); }
    Vec point(int k) const;
    double cell(int d) const { return points[d] > 1 ? (hi[d] - lo[d]) / (points[d] - 1) : 0.0; }
};

struct HJBProblem {
    int dim = 1;
    std::vector<ActionFamily> actions;
    std::optional<DriftLattice> drift_lattice;
    CostFn f;
    CostFn q;
    double q_lower = 1.0;  // declared bounds 0 < q_lower <= q <= q_upper
    double q_upper = 1.0;
    Vec u;                 // empty means zero
    double p = 2.0;
    int q_growth = 2;      // polynomial growth degree of the value function

    void validate() const;
    Vec u_or_zero() const { return u.size() == dim ? u : Vec::Zero(dim); }
};

/// Per-node action choice: family index, lattice index (-1 when the family
/// has no lattice drift) and the drift actually used (after refinement).
struct PolicyTable {
    Grid grid;
    std::vector<int> family;
    std::vector<int> lattice;
    Mat mu;  // dim x nodes

    explicit PolicyTable(Grid g);
    int action_id(int node) const { return family[node]; }
    Action action(int node, const HJBProblem& prob) const;
    bool same_as(const PolicyTable& o, double tol = 0.0) const;
};

struct SolveOptions {
    double tol = 1e-8;
    int max_iters = 100;
    double small_jump_split = -1.0;  // < 0: twice the grid spacing
    bool refine_drift = true;        // local quadratic refinement of the lattice argmin
    double interior_fraction = 0.1;  // outer fraction of each axis excluded from interior residuals
    Execution exec = Execution::Parallel;
};

struct EvaluationResult {
    Vec values;
    double linear_residual = 0.0;
    double condition_estimate = 0.0;  // reciprocal condition number (dense path)
    int nonmonotone_rows = 0;         // interior rows with negative off-diagonal generator weights
};

struct ConvergenceReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> value_change;
    std::vector<double> linear_residual;
    double hjb_residual = 0.0;       // sup over interior nodes of |min_a integrand|
    double hjb_min = 0.0;            // min over interior nodes of min_a integrand
    int nonmonotone_rows = 0;
    double condition_estimate = 0.0;
    double tail_residual = 0.0;
    int effective_tail_degree = 0;
    std::vector<std::string> warnings;
};

struct StationarySolution {
    ValueField value;
    PolicyTable policy;
    ConvergenceReport report;
};

/// Discrete generator on a grid: upwind drift, central diffusion, jump
/// coupling through interpolation and polynomial tail extension.
class DiscreteGenerator {
public:
    DiscreteGenerator(const Grid& grid, int q_growth, Vec u, double small_jump_split = -1.0);

    const Grid& grid() const { return grid_; }
    const TailExtension& extension() const { return ext_; }

    /// Row of L^a at node i (generator only, no discount).
    Stencil row(int node, const Action& a) const;

    /// Split form used for fast drift search: value = base + sum_d upwind(b_d).
    struct Parts {
        double base = 0.0;  // diffusion + jumps applied to phi
        Vec drift0;         // u - big-jump mean (drift before adding mu)
        Vec forward;        // forward differences of phi
        Vec backward;       // backward differences of phi
    };
    Parts parts(int node, const Action& a, const Vec& phi) const;
    static double drift_value(const Parts& p, const Vec& mu);

private:
    Stencil point_stencil(const Vec& x) const;
    void add_local(int node, const Vec& x, const Mat& cov, const Vec& b, Stencil& out) const;

    Grid grid_;
    TailExtension ext_;
    Vec u_;
    double delta_;
};

/// Solves the linear system L^{a(x)} phi - q phi + f = 0 for a fixed policy.
EvaluationResult policy_evaluation(const PolicyTable& pol, const HJBProblem& prob, const SolveOptions& opt = {});

struct ImprovementResult {
    PolicyTable policy;
    Vec best;  // min over actions of the discrete integrand, per node
};

/// Pointwise argmin of the discrete HJB integrand; ties go to the lowest index.
ImprovementResult policy_improvement(const Vec& phi, const HJBProblem& prob, const Grid& grid,
                                     const SolveOptions& opt = {});

StationarySolution solve_stationary(const HJBProblem& prob, const Grid& grid, const SolveOptions& opt = {});

/// Integrand of every candidate action at one node (lattice expanded), in index order.
std::vector<double> candidate_integrands(const Vec& phi, const HJBProblem& prob, const Grid& grid, int node,
                                         const SolveOptions& opt = {});

struct FiniteHorizonOptions {
    double T = 1.0;
    int n_steps = 10;
    bool exponential_fitting = true;  // exact for pure discounting
};

struct FiniteHorizonSolution {
    std::vector<double> times;
    std::vector<ValueField> values;  // values[k] at times[k]; values.back() is the terminal data
    std::vector<PolicyTable> policies;
};

FiniteHorizonSolution solve_finite_horizon(const HJBProblem& prob, const ScalarField& terminal, const Grid& grid,
                                           const FiniteHorizonOptions& fh, const SolveOptions& opt = {});

/// Feedback policy that follows a policy table: nearest-node family choice,
/// interpolated lattice drift (linearly extrapolated outside the grid).
PolicyField make_feedback(const PolicyTable& pol, const HJBProblem& prob);

struct DppReport {
    std::vector<double> residual;  // per probe: min over trials of E[...] - phi(x)
    std::vector<double> std_error; // of the minimizing trial
    std::vector<int> best_trial;
    double value = 0.0;            // sup over probes
};

/// Monte Carlo dynamic-programming residual over a horizon t.
DppReport dpp_residual(const ScalarField& phi, const HJBProblem& prob, const std::vector<PolicyField>& trials,
                       const std::vector<Vec>& probes, double t, SimConfig sim);

}  // namespace jumpctl
