#include "jumpctl/dynamics.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jumpctl {

double growth_lhs(const Action& a, double p)
{
    double v = std::pow(a.mu.norm(), p) + std::pow(a.sigma.norm(), p);
    if (!a.nu.nodes().empty() || a.nu.has_small_jump_cov())
        v += moment_functional(a.nu, p);
    return v;
}

PolicyField PolicyField::constant(Action a, std::string name)
{
    PolicyField pf;
    pf.kind_ = Kind::Constant;
    pf.dim_ = a.dim();
    pf.name_ = std::move(name);
    pf.base_ = std::move(a);
    return pf;
}

PolicyField PolicyField::affine_drift(Action base, Mat gain, Vec offset, std::string name)
{
    const int n = base.dim();
    if (gain.rows() != n || gain.cols() != n || offset.size() != n)
        throw Error("affine drift: gain must be n x n and offset length n");
    PolicyField pf;
    pf.kind_ = Kind::Affine;
    pf.dim_ = n;
    pf.name_ = std::move(name);
    pf.base_ = std::move(base);
    pf.gain_ = std::move(gain);
    pf.offset_ = std::move(offset);
    return pf;
}

PolicyField PolicyField::feedback(int dim, Map map, std::string name, bool measure_varies)
{
    PolicyField pf;
    pf.kind_ = Kind::General;
    pf.dim_ = dim;
    pf.name_ = std::move(name);
    pf.map_ = std::move(map);
    pf.measure_varies_ = measure_varies;
    return pf;
}

PolicyField PolicyField::with_certificate(GrowthCertificate c) const
{
    PolicyField pf = *this;
    pf.cert_ = c;
    return pf;
}

PolicyField PolicyField::with_ids(IdMap ids) const
{
    PolicyField pf = *this;
    pf.ids_ = std::move(ids);
    return pf;
}

void PolicyField::eval(const Vec& x, Action& out) const
{
    switch (kind_) {
    case Kind::Constant:
        out = base_;
        break;
    case Kind::Affine:
        if (out.mu.size() != dim_)
            out = base_;
        out.mu.noalias() = gain_ * x;
        out.mu += offset_;
        break;
    case Kind::General:
        out = map_(x);
        break;
    }
}

Action PolicyField::operator()(const Vec& x) const
{
    Action a;
    eval(x, a);
    return a;
}

std::pair<double, double> mean_se(const std::vector<double>& v)
{
    const double n = static_cast<double>(v.size());
    if (v.empty())
        return {0.0, 0.0};
    double m = 0.0;
    for (double x : v)
        m += x;
    m /= n;
    if (v.size() < 2)
        return {m, 0.0};
    double s2 = 0.0;
    for (double x : v)
        s2 += (x - m) * (x - m);
    s2 /= (n - 1.0);
    return {m, std::sqrt(s2 / n)};
}

namespace {

// Quantities evaluated at one point of the path and reused at both ends of
// a trapezoid panel.
struct PointValues {
    double f = 0.0;
    double q = 0.0;
    std::vector<double> g;
};

struct PathState {
    Vec x;
    Action a, a_next;
    PointValues v;
    double gamma = 0.0;
    double cost = 0.0;
    std::vector<double> integrals;

    Vec big_comp, b_formula, xc, xd;
    Mat cov;
    double sup_c = 0.0, sup_d = 0.0, jumps = 0.0, comp = 0.0, sig2 = 0.0, g2 = 0.0, qint = 0.0;
    std::vector<double> hq, hist_obs, hist_exp;

    // per-action caches refreshed whenever the action changes
    Vec nu_mean, nu_big_trunc;
    double nu_mass = 0.0, nu_m2 = 0.0, nu_mp = 0.0;
    std::vector<double> nu_hq, nu_bins;
};

class PathSimulator {
public:
    PathSimulator(const PolicyField& policy, const SimConfig& cfg, const PathFunctionals& fn, PathBundle& out,
                  int n_steps, double dt)
        : policy_(policy), cfg_(cfg), fn_(fn), out_(out), n_steps_(n_steps), dt_(dt)
    {
        n_ = static_cast<int>(cfg.x0.size());
        u_ = cfg.u.size() == n_ ? cfg.u : Vec::Zero(n_);
    }

    void run(int path)
    {
        Rng rng = stream_rng(cfg_.seed, static_cast<std::uint64_t>(path));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::exponential_distribution<double> expo(cfg_.lambda_max > 0.0 ? cfg_.lambda_max : 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);

        PathState s;
        s.x = cfg_.x0;
        s.integrals.assign(fn_.integrands.size(), 0.0);
        s.big_comp = s.b_formula = s.xc = s.xd = Vec::Zero(n_);
        s.cov = Mat::Zero(n_, n_);
        s.hq.assign(cfg_.moment_orders.size(), 0.0);
        const int bins = out_.bins();
        s.hist_obs.assign(bins, 0.0);
        s.hist_exp.assign(bins, 0.0);

        policy_.eval(s.x, s.a);
        refresh_measure(s);
        s.v = point_values(s.x, s.a);
        if (!check(path, s))
            return fill_rest(path, s, 0);
        record(path, 0, s);

        double t = 0.0;
        double next_arrival = cfg_.lambda_max > 0.0 ? expo(rng) : std::numeric_limits<double>::infinity();
        Vec dW(n_), x_new(n_), drift(n_);
        for (int k = 0; k < n_steps_; ++k) {
            const double t_end = (k + 1) * dt_;
            for (;;) {
                const double t_piece = std::min(next_arrival, t_end);
                const double h = t_piece - t;
                if (h > 0.0) {
                    for (int d = 0; d < n_; ++d)
                        dW[d] = std::sqrt(h) * normal(rng);
                    drift = u_ + s.a.mu - s.nu_mean;
                    x_new = s.x + drift * h;
                    x_new.noalias() += s.a.sigma * dW;
                    if (cfg_.record_characteristics)
                        accumulate_characteristics(s, dW, h);
                    advance(s, x_new, h);
                    t = t_piece;
                    if (!check(path, s))
                        return fill_rest(path, s, k / cfg_.record_every + 1);
                }
                if (next_arrival > t_end)
                    break;
                // arrival of the dominating clock at t; thin with the intensity at X_{t-}
                t = next_arrival;
                if (s.nu_mass > 0.0 && unif(rng) * cfg_.lambda_max < s.nu_mass) {
                    const Vec y = sample_jump(s.a.nu, rng);
                    s.x += y;
                    if (cfg_.record_characteristics)
                        record_jump(s, y);
                    policy_.eval(s.x, s.a);
                    if (policy_.measure_varies())
                        refresh_measure(s);
                    s.v = point_values(s.x, s.a);
                    if (!check(path, s))
                        return fill_rest(path, s, k / cfg_.record_every + 1);
                }
                next_arrival += expo(rng);
            }
            if ((k + 1) % cfg_.record_every == 0)
                record(path, (k + 1) / cfg_.record_every, s);
        }
    }

private:
    PointValues point_values(const Vec& x, const Action& a) const
    {
        PointValues v;
        v.f = fn_.f ? fn_.f(x, a) : 0.0;
        v.q = fn_.q ? fn_.q(x, a) : 0.0;
        v.g.resize(fn_.integrands.size());
        for (std::size_t j = 0; j < fn_.integrands.size(); ++j)
            v.g[j] = fn_.integrands[j](x, a);
        return v;
    }

    void refresh_measure(PathState& s) const
    {
        const JumpMeasure& nu = s.a.nu;
        s.nu_mass = nu.node_mass();
        if (s.nu_mass > cfg_.lambda_max * (1.0 + 1e-12))
            throw Error("jump intensity exceeds the thinning bound lambda_max");
        s.nu_mean = nu.nodes().empty() ? Vec::Zero(n_) : nu.node_mean();
        if (!cfg_.record_characteristics)
            return;
        s.nu_big_trunc = Vec::Zero(n_);
        s.nu_m2 = nu.small_jump_cov().trace();
        s.nu_mp = (nu.nodes().empty() && !nu.has_small_jump_cov()) ? 0.0 : moment_functional(nu, cfg_.p);
        s.nu_hq.assign(cfg_.moment_orders.size(), 0.0);
        s.nu_bins.assign(out_.bins(), 0.0);
        for (const auto& at : nu.nodes()) {
            const double r = at.location.norm();
            s.nu_m2 += at.mass * r * r;
            if (r > 1.0) {
                s.nu_big_trunc += at.mass * at.location;
                for (std::size_t j = 0; j < cfg_.moment_orders.size(); ++j)
                    s.nu_hq[j] += at.mass * std::pow(r, cfg_.moment_orders[j]);
            }
            const int b = bin_of(at.location[0]);
            if (b >= 0)
                s.nu_bins[b] += at.mass;
        }
    }

    int bin_of(double y) const
    {
        const auto& e = out_.jump_bin_edges;
        if (e.size() < 2 || y < e.front() || y >= e.back())
            return -1;
        return static_cast<int>(std::upper_bound(e.begin(), e.end(), y) - e.begin()) - 1;
    }

    // Left-point (predictable) increments of the characteristics over [t, t + h].
    void accumulate_characteristics(PathState& s, const Vec& dW, double h) const
    {
        const Vec b = u_ + s.a.mu;
        s.b_formula += (b - s.nu_big_trunc) * h;
        s.big_comp += s.nu_big_trunc * h;
        s.cov.noalias() += h * s.a.sigma * s.a.sigma.transpose();
        s.xc.noalias() += s.a.sigma * dW;
        s.xd -= s.nu_mean * h;
        s.comp += s.nu_mass * h;
        const double sn = s.a.sigma.squaredNorm();
        s.sig2 += sn * h;
        s.g2 += s.nu_m2 * h;
        s.qint += (s.a.mu.norm() + sn + s.nu_mp) * h;
        for (std::size_t j = 0; j < s.hq.size(); ++j)
            s.hq[j] += s.nu_hq[j] * h;
        for (std::size_t j = 0; j < s.hist_exp.size(); ++j)
            s.hist_exp[j] += s.nu_bins[j] * h;
        s.sup_c = std::max(s.sup_c, s.xc.norm());
        s.sup_d = std::max(s.sup_d, s.xd.norm());
    }

    void record_jump(PathState& s, const Vec& y) const
    {
        s.jumps += 1.0;
        s.xd += y;
        s.sup_d = std::max(s.sup_d, s.xd.norm());
        const int b = bin_of(y[0]);
        if (b >= 0)
            s.hist_obs[b] += 1.0;
    }

    // Moves the continuous part from s.x to x_new over a panel of length h.
    void advance(PathState& s, const Vec& x_new, double h) const
    {
        const Action* a_right = &s.a;
        if (!policy_.is_constant()) {
            policy_.eval(x_new, s.a_next);
            a_right = &s.a_next;
        }
        PointValues right = point_values(x_new, *a_right);
        const double gamma_new = s.gamma + 0.5 * (s.v.q + right.q) * h;
        s.cost += 0.5 * (std::exp(-s.gamma) * s.v.f + std::exp(-gamma_new) * right.f) * h;
        for (std::size_t j = 0; j < s.integrals.size(); ++j)
            s.integrals[j] += 0.5 * (s.v.g[j] + right.g[j]) * h;
        s.gamma = gamma_new;
        s.x = x_new;
        if (!policy_.is_constant()) {
            std::swap(s.a, s.a_next);
            if (policy_.measure_varies())
                refresh_measure(s);
        }
        s.v = std::move(right);
    }

    // Returns false when the path must stop (non-finite state).
    bool check(int path, PathState& s) const
    {
        if (!s.x.allFinite()) {
            out_.diverged[path] = 1;
            return false;
        }
        if (const auto& c = policy_.certificate()) {
            const double lhs = growth_lhs(s.a, c->p);
            if (!(lhs <= c->K * (1.0 + std::pow(s.x.norm(), c->p)))) {
                if (cfg_.on_violation == ViolationPolicy::Throw)
                    throw AdmissibilityError("policy '" + policy_.name() + "' left its growth class");
                out_.violated[path] = 1;
            }
        }
        return true;
    }

    void record(int path, int r, const PathState& s) const
    {
        const std::size_t i = out_.at(path, r);
        for (int d = 0; d < n_; ++d)
            out_.state[i * n_ + d] = s.x[d];
        out_.action_id[i] = policy_.action_id(s.x);
        out_.gamma[i] = s.gamma;
        out_.running_cost[i] = s.cost;
        out_.cost_rate[i] = s.v.f;
        for (int j = 0; j < out_.n_integrands; ++j)
            out_.integrals[i * out_.n_integrands + j] = s.integrals[j];
        for (int j = 0; j < out_.n_observables; ++j)
            out_.observables[i * out_.n_observables + j] = fn_.observables[j](s.x);
        if (!cfg_.record_characteristics)
            return;
        for (int d = 0; d < n_; ++d) {
            out_.drift_formula[i * n_ + d] = s.b_formula[d];
            out_.cont_part[i * n_ + d] = s.xc[d];
            out_.jump_part[i * n_ + d] = s.xd[d];
        }
        // X = x0 + B^h + X^c + h(y) * (N - eta) + (y - h(y)) * N, while X^d compensates
        // every jump, so B^h = X - x0 - X^c - X^d - (y - h(y)) * eta.
        const Vec b_obs = s.x - cfg_.x0 - s.xc - s.xd - s.big_comp;
        for (int d = 0; d < n_; ++d)
            out_.drift_observed[i * n_ + d] = b_obs[d];
        for (int d = 0; d < n_ * n_; ++d)
            out_.covariation[i * n_ * n_ + d] = s.cov.data()[d];
        out_.sup_cont[i] = s.sup_c;
        out_.sup_jump[i] = s.sup_d;
        out_.jump_count[i] = s.jumps;
        out_.compensator_mass[i] = s.comp;
        out_.sigma_energy[i] = s.sig2;
        out_.jump_energy[i] = s.g2;
        out_.admissibility[i] = s.qint;
        for (std::size_t j = 0; j < s.hq.size(); ++j)
            out_.big_jump_moment[i * s.hq.size() + j] = s.hq[j];
        if (r == out_.n_records - 1) {
            const int bins = out_.bins();
            for (int j = 0; j < bins; ++j) {
                out_.hist_observed[static_cast<std::size_t>(path) * bins + j] = s.hist_obs[j];
                out_.hist_expected[static_cast<std::size_t>(path) * bins + j] = s.hist_exp[j];
            }
        }
    }

    void fill_rest(int path, const PathState& s, int from) const
    {
        for (int r = std::max(from, 0); r < out_.n_records; ++r)
            record(path, r, s);
    }

    const PolicyField& policy_;
    const SimConfig& cfg_;
    const PathFunctionals& fn_;
    PathBundle& out_;
    int n_steps_;
    double dt_;
    int n_;
    Vec u_;
};

}  // namespace

PathBundle simulate(const PolicyField& policy, const SimConfig& cfg, const PathFunctionals& fn)
{
    const int n = static_cast<int>(cfg.x0.size());
    if (n < 1 || n != policy.dim())
        throw Error("simulate: x0 dimension does not match the policy");
    if (!(cfg.dt > 0.0) || !(cfg.T > 0.0))
        throw Error("simulate: dt and T must be positive");
    if (cfg.n_paths < 1 || cfg.record_every < 1)
        throw Error("simulate: n_paths and record_every must be >= 1");
    if (!std::isfinite(cfg.lambda_max) || cfg.lambda_max < 0.0)
        throw UnsupportedMeasureError("simulate: thinning bound must be finite (finite activity only)");

    const int n_steps = std::max(1, static_cast<int>(std::ceil(cfg.T / cfg.dt - 1e-9)));
    const double dt = cfg.T / n_steps;

    PathBundle b;
    b.n_paths = cfg.n_paths;
    b.n_records = n_steps / cfg.record_every + 1;
    b.dim = n;
    b.dt = dt;
    b.seed = cfg.seed;
    for (int r = 0; r < b.n_records; ++r)
        b.times.push_back(r * cfg.record_every * dt);
    const std::size_t cells = static_cast<std::size_t>(b.n_paths) * b.n_records;
    b.state.assign(cells * n, 0.0);
    b.action_id.assign(cells, 0);
    b.gamma.assign(cells, 0.0);
    b.running_cost.assign(cells, 0.0);
    b.cost_rate.assign(cells, 0.0);
    b.n_integrands = static_cast<int>(fn.integrands.size());
    b.integrals.assign(cells * b.n_integrands, 0.0);
    b.n_observables = static_cast<int>(fn.observables.size());
    b.observables.assign(cells * b.n_observables, 0.0);
    b.violated.assign(b.n_paths, 0);
    b.diverged.assign(b.n_paths, 0);
    b.has_characteristics = cfg.record_characteristics;
    b.moment_orders = cfg.moment_orders;
    b.jump_bin_edges = cfg.jump_bin_edges;
    if (cfg.record_characteristics) {
        b.drift_observed.assign(cells * n, 0.0);
        b.drift_formula.assign(cells * n, 0.0);
        b.covariation.assign(cells * n * n, 0.0);
        b.cont_part.assign(cells * n, 0.0);
        b.jump_part.assign(cells * n, 0.0);
        for (auto* v : {&b.sup_cont, &b.sup_jump, &b.jump_count, &b.compensator_mass, &b.sigma_energy,
                        &b.jump_energy, &b.admissibility})
            v->assign(cells, 0.0);
        b.big_jump_moment.assign(cells * cfg.moment_orders.size(), 0.0);
        b.hist_observed.assign(static_cast<std::size_t>(b.n_paths) * b.bins(), 0.0);
        b.hist_expected.assign(static_cast<std::size_t>(b.n_paths) * b.bins(), 0.0);
    }

    PathSimulator sim(policy, cfg, fn, b, n_steps, dt);
    detail::for_each_index(cfg.n_paths, cfg.exec, [&](int path) { sim.run(path); }, 64);
    return b;
}

PayoffEstimate payoff_from_bundle(const PathBundle& b, double q_lower, TailMode tail)
{
    PayoffEstimate e;
    e.n_paths = b.n_paths;
    const int last = b.n_records - 1;
    std::vector<double> j(b.n_paths), rem(b.n_paths);
    for (int p = 0; p < b.n_paths; ++p) {
        j[p] = b.running_cost[b.at(p, last)];
        rem[p] = std::exp(-b.gamma[b.at(p, last)]) * b.cost_rate[b.at(p, last)];
    }
    std::tie(e.estimate, e.std_error) = mean_se(j);
    if (tail == TailMode::Truncate || b.n_records < 3)
        return e;

    // Exponential rate of E[f(X_t)] over the second half of the lattice.
    std::vector<double> ts, ls;
    for (int r = last / 2; r <= last; ++r) {
        double m = 0.0;
        for (int p = 0; p < b.n_paths; ++p)
            m += b.cost_rate[b.at(p, r)];
        m /= b.n_paths;
        if (m > 0.0) {
            ts.push_back(b.times[r]);
            ls.push_back(std::log(m));
        }
    }
    double rate = 0.0;
    if (ts.size() >= 2) {
        const double n = static_cast<double>(ts.size());
        double st = 0, sl = 0, stt = 0, stl = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            st += ts[i];
            sl += ls[i];
            stt += ts[i] * ts[i];
            stl += ts[i] * ls[i];
        }
        const double den = n * stt - st * st;
        if (den > 0.0)
            rate = (n * stl - st * sl) / den;
    }
    e.growth_rate = std::max(rate, 0.0);
    const auto [m_rem, se_rem] = mean_se(rem);
    if (e.growth_rate >= q_lower)
        e.tail_bound = std::numeric_limits<double>::infinity();
    else
        e.tail_bound = std::max(m_rem + 3.0 * se_rem, 0.0) / (q_lower - e.growth_rate);
    return e;
}

PayoffEstimate payoff_estimate(const PolicyField& policy, const SimConfig& cfg, const CostFn& f, const CostFn& q,
                               double q_lower, TailMode tail)
{
    PathFunctionals fn;
    fn.f = f;
    fn.q = q;
    return payoff_from_bundle(simulate(policy, cfg, fn), q_lower, tail);
}

BellmanSeries bellman_series(const ScalarField& phi, const PathBundle& b)
{
    BellmanSeries s;
    s.times = b.times;
    s.S.resize(b.n_paths, b.n_records);
    s.anchor.resize(b.n_paths, b.n_records);
    double reach = std::numeric_limits<double>::infinity();
    const Grid* g = phi.field() ? &phi.field()->grid() : nullptr;
    for (int p = 0; p < b.n_paths; ++p) {
        for (int r = 0; r < b.n_records; ++r) {
            const Vec x = b.x(p, r);
            if (g) {
                for (int d = 0; d < g->dim(); ++d) {
                    const double w = g->axis(d).hi - g->axis(d).lo;
                    reach = std::min(reach, w);
                    if (x[d] < g->axis(d).lo - w || x[d] > g->axis(d).hi + w)
                        throw GrowthError("path left the region where the value field's tail fit is certified");
                }
            }
            const std::size_t i = b.at(p, r);
            s.S(p, r) = b.running_cost[i] + std::exp(-b.gamma[i]) * phi(x);
            s.anchor(p, r) = x[0];
        }
    }
    return s;
}

CharacteristicsReport characteristics_report(const PathBundle& b)
{
    if (!b.has_characteristics)
        throw Error("characteristics were not recorded for this bundle");
    CharacteristicsReport rep;
    const int n = b.dim;
    const int last = b.n_records - 1;
    rep.n_paths = b.n_paths;
    rep.T = b.times.back();
    rep.drift_observed_mean = Vec::Zero(n);
    rep.drift_formula_mean = Vec::Zero(n);
    rep.covariation_mean = Mat::Zero(n, n);
    std::vector<double> counts(b.n_paths), comp(b.n_paths);
    for (int p = 0; p < b.n_paths; ++p) {
        const std::size_t i = b.at(p, last);
        for (int d = 0; d < n; ++d) {
            rep.drift_observed_mean[d] += b.drift_observed[i * n + d];
            rep.drift_formula_mean[d] += b.drift_formula[i * n + d];
            for (int r = 0; r < b.n_records; ++r) {
                const std::size_t k = b.at(p, r);
                rep.drift_max_gap = std::max(rep.drift_max_gap,
                                             std::abs(b.drift_observed[k * n + d] - b.drift_formula[k * n + d]));
            }
        }
        for (int d = 0; d < n * n; ++d)
            rep.covariation_mean.data()[d] += b.covariation[i * n * n + d];
        counts[p] = b.jump_count[i];
        comp[p] = b.compensator_mass[i];
    }
    rep.drift_observed_mean /= b.n_paths;
    rep.drift_formula_mean /= b.n_paths;
    rep.covariation_mean /= b.n_paths;
    const Mat sym = 0.5 * (rep.covariation_mean + rep.covariation_mean.transpose());
    rep.covariation_min_eig = Eigen::SelfAdjointEigenSolver<Mat>(sym).eigenvalues().minCoeff();
    std::tie(rep.jump_count_mean, rep.jump_count_se) = mean_se(counts);
    rep.compensator_mean = mean_se(comp).first;

    const int bins = b.bins();
    rep.bin_edges = b.jump_bin_edges;
    for (int j = 0; j < bins; ++j) {
        std::vector<double> diff(b.n_paths), obs(b.n_paths), expct(b.n_paths);
        for (int p = 0; p < b.n_paths; ++p) {
            obs[p] = b.hist_observed[static_cast<std::size_t>(p) * bins + j];
            expct[p] = b.hist_expected[static_cast<std::size_t>(p) * bins + j];
            diff[p] = obs[p] - expct[p];
        }
        const auto [md, sd] = mean_se(diff);
        rep.bin_observed.push_back(mean_se(obs).first);
        rep.bin_expected.push_back(mean_se(expct).first);
        const double z = sd > 0.0 ? md / sd : (md == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        rep.bin_z.push_back(z);
        rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
    }
    return rep;
}

}  // namespace jumpctl
