#include "jumpctl/hjb.hpp"

#include "parallel.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace jumpctl {

namespace {

constexpr int kDenseLimit = 2048;

Stencil merged(Stencil s)
{
    std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Stencil out;
    for (const auto& e : s) {
        if (!out.empty() && out.back().first == e.first)
            out.back().second += e.second;
        else
            out.push_back(e);
    }
    return out;
}

void add_scaled(Stencil& out, const Stencil& s, double w)
{
    for (const auto& [i, v] : s)
        out.push_back({i, w * v});
}

int interior_depth(const Grid& g, double fraction)
{
    int n = g.axis(0).n;
    for (int d = 1; d < g.dim(); ++d)
        n = std::min(n, g.axis(d).n);
    return std::max(1, static_cast<int>(std::ceil(fraction * n)));
}

}  // namespace

ActionFamily ActionFamily::constant(std::string name, Action a, DriftMode drift)
{
    return {std::move(name), [a](const Vec&) { return a; }, drift};
}

int DriftLattice::size() const
{
    int n = 1;
    for (int p : points)
        n *= p;
    return n;
}

Vec DriftLattice::point(int k) const
{
    Vec mu(dim());
    for (int d = 0; d < dim(); ++d) {
        const int i = k % points[d];
        k /= points[d];
        mu[d] = points[d] > 1 ? lo[d] + i * cell(d) : lo[d];
    }
    return mu;
}

void HJBProblem::validate() const
{
    if (dim < 1)
        throw Error("HJB problem dimension must be positive");
    if (actions.empty())
        throw Error("HJB problem has an empty action set");
    if (!(q_lower > 0.0))
        throw Error("discount lower bound must be positive");
    if (!(q_upper >= q_lower))
        throw Error("discount upper bound must be >= lower bound");
    if (!f || !q)
        throw Error("HJB problem needs a running cost f and a discount q");
    if (!(p >= 2.0))
        throw Error("moment order p must be >= 2");
    if (q_growth > p)
        throw GrowthError("value growth degree exceeds the moment order p");
    bool needs_lattice = false;
    for (const auto& fam : actions)
        needs_lattice = needs_lattice || fam.drift == DriftMode::Lattice;
    if (needs_lattice) {
        if (!drift_lattice)
            throw Error("an action family uses lattice drift but no drift lattice is given");
        if (drift_lattice->dim() != dim || static_cast<int>(drift_lattice->points.size()) != dim)
            throw Error("drift lattice dimension mismatch");
        for (int pnt : drift_lattice->points)
            if (pnt < 1)
                throw Error("drift lattice needs at least one point per axis");
    }
}

PolicyTable::PolicyTable(Grid g) : grid(std::move(g))
{
    family.assign(grid.size(), 0);
    lattice.assign(grid.size(), -1);
    mu = Mat::Zero(grid.dim(), grid.size());
}

Action PolicyTable::action(int node, const HJBProblem& prob) const
{
    Action a = prob.actions[family[node]].at(grid.point(node));
    a.mu = mu.col(node);
    return a;
}

bool PolicyTable::same_as(const PolicyTable& o, double tol) const
{
    return family == o.family && lattice == o.lattice && (mu - o.mu).cwiseAbs().maxCoeff() <= tol;
}

DiscreteGenerator::DiscreteGenerator(const Grid& grid, int q_growth, Vec u, double small_jump_split)
    : grid_(grid), ext_(grid, q_growth), u_(std::move(u))
{
    if (u_.size() != grid.dim())
        u_ = Vec::Zero(grid.dim());
    delta_ = small_jump_split >= 0.0 ? small_jump_split : 2.0 * grid.spacing();
}

Stencil DiscreteGenerator::point_stencil(const Vec& x) const { return ext_.stencil(x); }

void DiscreteGenerator::add_local(int node, const Vec& x, const Mat& cov, const Vec& b, Stencil& out) const
{
    const int n = grid_.dim();
    Vec y = x;
    for (int d = 0; d < n; ++d) {
        const double h = grid_.axis(d).h();
        y[d] = x[d] + h;
        const Stencil plus = point_stencil(y);
        y[d] = x[d] - h;
        const Stencil minus = point_stencil(y);
        y[d] = x[d];
        if (b[d] > 0.0) {
            add_scaled(out, plus, b[d] / h);
            out.push_back({node, -b[d] / h});
        } else if (b[d] < 0.0) {
            out.push_back({node, b[d] / h});
            add_scaled(out, minus, -b[d] / h);
        }
        const double a = 0.5 * cov(d, d) / (h * h);
        if (a != 0.0) {
            add_scaled(out, plus, a);
            add_scaled(out, minus, a);
            out.push_back({node, -2.0 * a});
        }
    }
    if (n == 2 && cov(0, 1) != 0.0) {
        const double h0 = grid_.axis(0).h(), h1 = grid_.axis(1).h();
        const double c = cov(0, 1) / (4.0 * h0 * h1);
        for (int s0 : {1, -1})
            for (int s1 : {1, -1}) {
                y[0] = x[0] + s0 * h0;
                y[1] = x[1] + s1 * h1;
                add_scaled(out, point_stencil(y), c * s0 * s1);
            }
    }
}

Stencil DiscreteGenerator::row(int node, const Action& a) const
{
    const Vec x = grid_.point(node);
    const int n = grid_.dim();
    Mat cov = a.sigma * a.sigma.transpose() + a.nu.small_jump_cov();
    Vec b = u_ + a.mu;
    Stencil out;
    for (const auto& at : a.nu.nodes()) {
        if (at.mass == 0.0)
            continue;
        if (at.location.norm() <= delta_) {
            cov.noalias() += at.mass * at.location * at.location.transpose();
        } else {
            b -= at.mass * at.location;
            add_scaled(out, point_stencil(x + at.location), at.mass);
            out.push_back({node, -at.mass});
        }
    }
    if (cov.rows() != n)
        throw Error("action dimension does not match the grid");
    add_local(node, x, cov, b, out);
    return merged(std::move(out));
}

DiscreteGenerator::Parts DiscreteGenerator::parts(int node, const Action& a, const Vec& phi) const
{
    const Vec x = grid_.point(node);
    const int n = grid_.dim();
    Parts p;
    Mat cov = a.sigma * a.sigma.transpose() + a.nu.small_jump_cov();
    p.drift0 = u_;
    const double phi0 = phi[node];
    for (const auto& at : a.nu.nodes()) {
        if (at.mass == 0.0)
            continue;
        if (at.location.norm() <= delta_) {
            cov.noalias() += at.mass * at.location * at.location.transpose();
        } else {
            p.drift0 -= at.mass * at.location;
            p.base += at.mass * (apply_stencil(point_stencil(x + at.location), phi) - phi0);
        }
    }
    Stencil diffusion;
    add_local(node, x, cov, Vec::Zero(n), diffusion);
    p.base += apply_stencil(diffusion, phi);
    p.forward.resize(n);
    p.backward.resize(n);
    Vec y = x;
    for (int d = 0; d < n; ++d) {
        const double h = grid_.axis(d).h();
        y[d] = x[d] + h;
        p.forward[d] = (apply_stencil(point_stencil(y), phi) - phi0) / h;
        y[d] = x[d] - h;
        p.backward[d] = (phi0 - apply_stencil(point_stencil(y), phi)) / h;
        y[d] = x[d];
    }
    return p;
}

double DiscreteGenerator::drift_value(const Parts& p, const Vec& mu)
{
    double v = p.base;
    for (int d = 0; d < mu.size(); ++d) {
        const double b = p.drift0[d] + mu[d];
        v += b > 0.0 ? b * p.forward[d] : b * p.backward[d];
    }
    return v;
}

namespace {

void check_cost(const HJBProblem& prob, double f, double q)
{
    if (!std::isfinite(f) || f < 0.0)
        throw Error("running cost must be finite and nonnegative");
    if (!(q >= prob.q_lower * (1.0 - 1e-12) && q <= prob.q_upper * (1.0 + 1e-12)))
        throw Error("discount rate outside its declared bounds");
}

struct Candidate {
    double value = std::numeric_limits<double>::infinity();
    int family = 0;
    int lattice = -1;
    Vec mu;
};

// Evaluates every candidate of family k at one node; calls visit(value, lattice, mu)
// in index order and returns the best (lowest index wins ties).
template <class Visit>
Candidate scan_family(const DiscreteGenerator& gen, const HJBProblem& prob, const Vec& phi, int node, int k,
                      bool refine, Visit&& visit)
{
    const Vec x = gen.grid().point(node);
    const ActionFamily& fam = prob.actions[k];
    Action a = fam.at(x);
    if (a.dim() != prob.dim)
        throw Error("action family '" + fam.name + "' returned an action of the wrong dimension");
    const auto parts = gen.parts(node, a, phi);
    const double phi0 = phi[node];
    auto integrand = [&](const Vec& mu) {
        a.mu = mu;
        const double f = prob.f(x, a);
        const double q = prob.q(x, a);
        check_cost(prob, f, q);
        return DiscreteGenerator::drift_value(parts, mu) - q * phi0 + f;
    };
    Candidate best;
    best.family = k;
    if (fam.drift != DriftMode::Lattice) {
        const Vec mu = fam.drift == DriftMode::Compensate
                           ? (a.nu.nodes().empty() ? Vec::Zero(prob.dim) : Vec(a.nu.node_mean()))
                           : Vec(a.mu);
        best.value = integrand(mu);
        best.mu = mu;
        visit(best.value, -1, mu);
        return best;
    }
    const DriftLattice& lat = *prob.drift_lattice;
    const int m = lat.size();
    for (int j = 0; j < m; ++j) {
        const Vec mu = lat.point(j);
        const double v = integrand(mu);
        visit(v, j, mu);
        if (v < best.value) {
            best.value = v;
            best.lattice = j;
            best.mu = mu;
        }
    }
    if (!refine)
        return best;
    // one local quadratic refinement per axis around the lattice argmin
    int rem = best.lattice;
    for (int d = 0; d < lat.dim(); ++d) {
        const int i = rem % lat.points[d];
        rem /= lat.points[d];
        if (i == 0 || i == lat.points[d] - 1)
            continue;
        const double c = lat.cell(d);
        Vec mu = best.mu;
        mu[d] -= c;
        const double vm = integrand(mu);
        mu[d] += 2.0 * c;
        const double vp = integrand(mu);
        const double curv = vm - 2.0 * best.value + vp;
        if (!(curv > 0.0))
            continue;
        const double t = 0.5 * (vm - vp) / curv;
        if (std::abs(t) > 1.0)
            continue;
        mu[d] = best.mu[d] + t * c;
        const double v = integrand(mu);
        if (v < best.value) {
            best.value = v;
            best.mu = mu;
        }
    }
    return best;
}

}  // namespace

ImprovementResult policy_improvement(const Vec& phi, const HJBProblem& prob, const Grid& grid,
                                     const SolveOptions& opt)
{
    prob.validate();
    if (grid.dim() != prob.dim)
        throw Error("grid dimension does not match the problem");
    if (phi.size() != grid.size() || !phi.allFinite())
        throw Error("policy improvement needs finite values on every node");
    const DiscreteGenerator gen(grid, prob.q_growth, prob.u_or_zero(), opt.small_jump_split);
    ImprovementResult res{PolicyTable(grid), Vec::Zero(grid.size())};
    detail::for_each_index(grid.size(), opt.exec, [&](int node) {
        Candidate best;
        for (int k = 0; k < static_cast<int>(prob.actions.size()); ++k) {
            Candidate c = scan_family(gen, prob, phi, node, k, opt.refine_drift, [](double, int, const Vec&) {});
            if (c.value < best.value)
                best = std::move(c);
        }
        res.policy.family[node] = best.family;
        res.policy.lattice[node] = best.lattice;
        res.policy.mu.col(node) = best.mu;
        res.best[node] = best.value;
    });
    return res;
}

std::vector<double> candidate_integrands(const Vec& phi, const HJBProblem& prob, const Grid& grid, int node,
                                         const SolveOptions& opt)
{
    prob.validate();
    const DiscreteGenerator gen(grid, prob.q_growth, prob.u_or_zero(), opt.small_jump_split);
    std::vector<double> out;
    for (int k = 0; k < static_cast<int>(prob.actions.size()); ++k)
        scan_family(gen, prob, phi, node, k, false, [&](double v, int, const Vec&) { out.push_back(v); });
    return out;
}

namespace {

// Assembles diag(shift + q) - L for a fixed policy and solves against rhs.
EvaluationResult solve_policy_system(const PolicyTable& pol, const HJBProblem& prob, const SolveOptions& opt,
                                     const Vec& shift, const Vec& extra_rhs)
{
    const Grid& grid = pol.grid;
    const int N = grid.size();
    const DiscreteGenerator gen(grid, prob.q_growth, prob.u_or_zero(), opt.small_jump_split);
    std::vector<Stencil> rows(N);
    Vec rhs(N), diag(N);
    std::vector<char> nonmono(N, 0);
    const int depth = interior_depth(grid, opt.interior_fraction);
    detail::for_each_index(N, opt.exec, [&](int node) {
        const Action a = pol.action(node, prob);
        const Vec x = grid.point(node);
        const double f = prob.f(x, a);
        const double q = prob.q(x, a);
        check_cost(prob, f, q);
        rows[node] = gen.row(node, a);
        diag[node] = q + (shift.size() ? shift[node] : 0.0);
        rhs[node] = f + (extra_rhs.size() ? extra_rhs[node] : 0.0);
        if (grid.boundary_depth(node) >= depth)
            for (const auto& [j, w] : rows[node])
                if (j != node && w < -1e-12)
                    nonmono[node] = 1;
    });

    EvaluationResult res;
    for (char c : nonmono)
        res.nonmonotone_rows += c;
    if (N <= kDenseLimit) {
        Mat M = Mat::Zero(N, N);
        for (int i = 0; i < N; ++i) {
            M(i, i) += diag[i];
            for (const auto& [j, w] : rows[i])
                M(i, j) -= w;
        }
        Eigen::PartialPivLU<Mat> lu(M);
        res.condition_estimate = lu.rcond();
        if (!(res.condition_estimate > 1e-14))
            throw SolverError("policy evaluation system is singular or ill-conditioned", res.condition_estimate);
        res.values = lu.solve(rhs);
        res.linear_residual = (M * res.values - rhs).cwiseAbs().maxCoeff();
    } else {
        std::vector<Eigen::Triplet<double>> trip;
        for (int i = 0; i < N; ++i) {
            trip.emplace_back(i, i, diag[i]);
            for (const auto& [j, w] : rows[i])
                trip.emplace_back(i, j, -w);
        }
        Eigen::SparseMatrix<double> M(N, N);
        M.setFromTriplets(trip.begin(), trip.end());
        M.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(M);
        if (lu.info() != Eigen::Success)
            throw SolverError("sparse factorization of the policy evaluation system failed", 0.0);
        res.values = lu.solve(rhs);
        res.linear_residual = (M * res.values - rhs).cwiseAbs().maxCoeff();
        res.condition_estimate = std::numeric_limits<double>::quiet_NaN();
    }
    if (!res.values.allFinite())
        throw SolverError("policy evaluation produced non-finite values", res.condition_estimate);
    return res;
}

}  // namespace

EvaluationResult policy_evaluation(const PolicyTable& pol, const HJBProblem& prob, const SolveOptions& opt)
{
    prob.validate();
    if (pol.grid.dim() != prob.dim)
        throw Error("grid dimension does not match the problem");
    for (int k : pol.family)
        if (k < 0 || k >= static_cast<int>(prob.actions.size()))
            throw Error("policy table refers to an action outside the action set");
    return solve_policy_system(pol, prob, opt, Vec(), Vec());
}

StationarySolution solve_stationary(const HJBProblem& prob, const Grid& grid, const SolveOptions& opt)
{
    prob.validate();
    if (grid.dim() != prob.dim)
        throw Error("grid dimension does not match the problem");
    ImprovementResult imp = policy_improvement(Vec::Zero(grid.size()), prob, grid, opt);
    ConvergenceReport rep;
    Vec phi = Vec::Zero(grid.size());
    PolicyTable pol = imp.policy;
    for (int it = 1; it <= opt.max_iters; ++it) {
        const EvaluationResult ev = policy_evaluation(pol, prob, opt);
        const double change = (ev.values - phi).cwiseAbs().maxCoeff();
        phi = ev.values;
        rep.iterations = it;
        rep.value_change.push_back(change);
        rep.linear_residual.push_back(ev.linear_residual);
        rep.nonmonotone_rows = ev.nonmonotone_rows;
        rep.condition_estimate = ev.condition_estimate;
        imp = policy_improvement(phi, prob, grid, opt);
        if ((it > 1 && change < opt.tol) || imp.policy.same_as(pol)) {
            rep.converged = true;
            break;
        }
        pol = imp.policy;
    }
    if (!rep.converged) {
        std::ostringstream os;
        os << "policy iteration did not converge in " << opt.max_iters << " iterations";
        rep.warnings.push_back(os.str());
    }
    if (rep.nonmonotone_rows > 0) {
        std::ostringstream os;
        os << rep.nonmonotone_rows << " interior rows have negative off-diagonal weights (non-monotone scheme)";
        rep.warnings.push_back(os.str());
    }
    const int depth = interior_depth(grid, opt.interior_fraction);
    rep.hjb_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.size(); ++i) {
        if (grid.boundary_depth(i) < depth)
            continue;
        rep.hjb_residual = std::max(rep.hjb_residual, std::abs(imp.best[i]));
        rep.hjb_min = std::min(rep.hjb_min, imp.best[i]);
    }
    ValueField value(grid, phi, prob.q_growth);
    rep.tail_residual = value.tail_residual();
    rep.effective_tail_degree = value.effective_tail_degree();
    return {std::move(value), std::move(imp.policy), std::move(rep)};
}

FiniteHorizonSolution solve_finite_horizon(const HJBProblem& prob, const ScalarField& terminal, const Grid& grid,
                                           const FiniteHorizonOptions& fh, const SolveOptions& opt)
{
    prob.validate();
    if (grid.dim() != prob.dim)
        throw Error("grid dimension does not match the problem");
    if (!(fh.T > 0.0) || fh.n_steps < 1)
        throw Error("finite horizon needs T > 0 and n_steps >= 1");
    if (terminal.growth() > prob.p)
        throw GrowthError("terminal data grows faster than the moment order allows");
    const int N = grid.size();
    const double dt = fh.T / fh.n_steps;
    Vec phi(N);
    for (int i = 0; i < N; ++i) {
        phi[i] = terminal(grid.point(i));
        if (!std::isfinite(phi[i]) || phi[i] < 0.0)
            throw Error("terminal data must be finite and nonnegative");
    }
    FiniteHorizonSolution sol;
    sol.times.resize(fh.n_steps + 1);
    std::vector<Vec> values(fh.n_steps + 1);
    std::vector<PolicyTable> policies;
    values[fh.n_steps] = phi;
    for (int k = 0; k <= fh.n_steps; ++k)
        sol.times[k] = k * dt;
    for (int k = fh.n_steps - 1; k >= 0; --k) {
        const ImprovementResult imp = policy_improvement(values[k + 1], prob, grid, opt);
        Vec shift(N), extra(N);
        for (int i = 0; i < N; ++i) {
            double step = dt;
            if (fh.exponential_fitting) {
                const double q = prob.q(grid.point(i), imp.policy.action(i, prob));
                step = std::expm1(q * dt) / q;
            }
            shift[i] = 1.0 / step;
            extra[i] = values[k + 1][i] / step;
        }
        values[k] = solve_policy_system(imp.policy, prob, opt, shift, extra).values;
        policies.push_back(imp.policy);
    }
    std::reverse(policies.begin(), policies.end());
    for (auto& v : values)
        sol.values.emplace_back(grid, std::move(v), prob.q_growth);
    sol.policies = std::move(policies);
    return sol;
}

PolicyField make_feedback(const PolicyTable& pol, const HJBProblem& prob)
{
    const auto table = std::make_shared<const PolicyTable>(pol);
    const auto linear = std::make_shared<const TailExtension>(pol.grid, 1);
    const auto families = std::make_shared<const std::vector<ActionFamily>>(prob.actions);
    auto nearest = [table](const Vec& x) {
        std::array<int, 2> idx{0, 0};
        for (int d = 0; d < table->grid.dim(); ++d) {
            const Axis& ax = table->grid.axis(d);
            const int i = static_cast<int>(std::lround((x[d] - ax.lo) / ax.h()));
            idx[d] = std::clamp(i, 0, ax.n - 1);
        }
        return table->grid.node_index(idx);
    };
    auto map = [table, linear, families, nearest](const Vec& x) {
        const int node = nearest(x);
        const ActionFamily& fam = (*families)[table->family[node]];
        Action a = fam.at(x);
        if (fam.drift == DriftMode::Lattice) {
            const Stencil s = linear->stencil(x);
            for (int d = 0; d < a.mu.size(); ++d) {
                double v = 0.0;
                for (const auto& [j, w] : s)
                    v += w * table->mu(d, j);
                a.mu[d] = v;
            }
        } else if (fam.drift == DriftMode::Compensate) {
            a.mu = a.nu.nodes().empty() ? Vec::Zero(a.mu.size()) : Vec(a.nu.node_mean());
        }
        return a;
    };
    return PolicyField::feedback(pol.grid.dim(), map, "policy-table")
        .with_ids([table, nearest](const Vec& x) { return table->family[nearest(x)]; });
}

DppReport dpp_residual(const ScalarField& phi, const HJBProblem& prob, const std::vector<PolicyField>& trials,
                       const std::vector<Vec>& probes, double t, SimConfig sim)
{
    if (trials.empty())
        throw Error("dpp residual needs at least one trial policy");
    if (sim.u.size() != prob.dim)
        sim.u = prob.u_or_zero();
    DppReport rep;
    rep.value = -std::numeric_limits<double>::infinity();
    for (const Vec& x : probes) {
        double best = std::numeric_limits<double>::infinity(), best_se = 0.0;
        int best_k = 0;
        if (t <= 0.0) {
            best = 0.0;
        } else {
            for (std::size_t k = 0; k < trials.size(); ++k) {
                sim.x0 = x;
                sim.T = t;
                sim.record_every = std::max(1, static_cast<int>(std::ceil(t / sim.dt - 1e-9)));
                PathFunctionals fn;
                fn.f = prob.f;
                fn.q = prob.q;
                const PathBundle b = simulate(trials[k], sim, fn);
                const BellmanSeries s = bellman_series(phi, b);
                std::vector<double> last(b.n_paths);
                for (int p = 0; p < b.n_paths; ++p)
                    last[p] = s.S(p, b.n_records - 1);
                const auto [m, se] = mean_se(last);
                const double r = m - phi(x);
                if (r < best) {
                    best = r;
                    best_se = se;
                    best_k = static_cast<int>(k);
                }
            }
        }
        rep.residual.push_back(best);
        rep.std_error.push_back(best_se);
        rep.best_trial.push_back(best_k);
        rep.value = std::max(rep.value, best);
    }
    return rep;
}

}  // namespace jumpctl
