#include "jumpctl/verify.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace jumpctl {

void TestReport::add(Statistic s)
{
    if (!s.excluded && !s.pass)
        pass = false;
    stats.push_back(std::move(s));
}

int TestReport::failures() const
{
    int n = 0;
    for (const auto& s : stats)
        n += (!s.excluded && !s.pass) ? 1 : 0;
    return n;
}

int record_index(const std::vector<double>& times, double t)
{
    if (times.empty())
        throw Error("empty record lattice");
    int best = 0;
    for (int r = 1; r < static_cast<int>(times.size()); ++r)
        if (std::abs(times[r] - t) < std::abs(times[best] - t))
            best = r;
    return best;
}

namespace {

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Absolute slack for statistics that are exactly zero in exact arithmetic.
double roundoff(double scale) { return 1e-12 * (1.0 + std::abs(scale)); }

}  // namespace

TestReport submartingale_test(const BellmanSeries& S, const std::vector<std::pair<int, int>>& pairs,
                              MartingaleMode mode, const BinningOptions& opt)
{
    const int n = static_cast<int>(S.S.rows());
    if (n < 1000)
        throw Error("submartingale test needs at least 1000 paths");
    if (opt.n_bins < 1)
        throw Error("n_bins must be >= 1");
    TestReport rep;
    rep.name = mode == MartingaleMode::Martingale ? "martingale" : "submartingale";

    struct Cell {
        int pair;
        int bin;
        double lo, hi;
        std::vector<int> members;
    };
    std::vector<Cell> cells;
    for (int k = 0; k < static_cast<int>(pairs.size()); ++k) {
        const auto [s, t] = pairs[k];
        if (s < 0 || t <= s || t >= S.S.cols())
            throw Error("record pair must satisfy 0 <= s < t < n_records");
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return S.anchor(a, s) < S.anchor(b, s); });
        // equal-count bins; paths with identical anchors never straddle a bin edge
        int start = 0;
        for (int b = 0; b < opt.n_bins && start < n; ++b) {
            int end = (b + 1 == opt.n_bins) ? n : static_cast<int>(static_cast<long>(n) * (b + 1) / opt.n_bins);
            end = std::max(end, start + 1);
            while (end < n && S.anchor(order[end], s) == S.anchor(order[end - 1], s))
                ++end;
            Cell c{k, b, S.anchor(order[start], s), S.anchor(order[end - 1], s), {}};
            c.members.assign(order.begin() + start, order.begin() + end);
            cells.push_back(std::move(c));
            start = end;
        }
    }

    std::vector<Statistic> stats(cells.size());
    detail::for_each_index(
        static_cast<int>(cells.size()), opt.exec,
        [&](int i) {
            const Cell& c = cells[i];
            const auto [s, t] = pairs[c.pair];
            std::vector<double> inc;
            inc.reserve(c.members.size());
            double scale = 0.0;
            for (int p : c.members) {
                inc.push_back(S.S(p, t) - S.S(p, s));
                scale = std::max(scale, std::abs(S.S(p, s)));
            }
            const auto [m, se] = mean_se(inc);
            Statistic st;
            std::ostringstream os;
            os << "t=" << fmt(S.times[t]) << " s=" << fmt(S.times[s]) << " bin " << c.bin << " x in [" << fmt(c.lo)
               << ", " << fmt(c.hi) << "]";
            st.label = os.str();
            st.value = m;
            st.std_error = se;
            st.threshold = opt.z * se + roundoff(scale);
            st.n = static_cast<long>(c.members.size());
            st.excluded = st.n < opt.min_per_bin;
            st.pass = mode == MartingaleMode::Martingale ? std::abs(m) <= st.threshold : m >= -st.threshold;
            stats[i] = std::move(st);
        },
        1);
    for (auto& st : stats)
        rep.add(std::move(st));
    int used = 0;
    for (const auto& st : rep.stats)
        used += st.excluded ? 0 : 1;
    if (used == 0) {
        rep.pass = false;
        rep.notes.push_back("every bin was undersampled");
    }
    return rep;
}

TestReport transversality_test(const PolicyField& policy, const ScalarField& phi, const std::vector<double>& times,
                               SimConfig cfg, const CostFn& q, TransversalityFit* fit_out, double z)
{
    if (times.size() < 4)
        throw Error("transversality test needs at least 4 lattice times");
    if (!std::is_sorted(times.begin(), times.end()))
        throw Error("transversality lattice must be increasing");
    cfg.T = times.back();
    PathFunctionals fn;
    fn.q = q;
    fn.observables.push_back([&phi](const Vec& x) { return phi(x); });
    const PathBundle b = simulate(policy, cfg, fn);

    TransversalityFit fit;
    fit.times = times;
    std::vector<double> v(b.n_paths);
    for (double t : times) {
        const int r = record_index(b.times, t);
        for (int p = 0; p < b.n_paths; ++p) {
            const std::size_t i = b.at(p, r);
            v[p] = std::exp(-b.gamma[i]) * b.observables[i];
        }
        const auto [m, se] = mean_se(v);
        fit.mean.push_back(m);
        fit.std_error.push_back(se);
    }

    TestReport rep;
    rep.name = "transversality";
    rep.notes.push_back("sufficient, not equivalent: eventual monotone decay plus an exponential tail fit");
    const int K = static_cast<int>(times.size());
    const int first = K / 2;

    fit.eventually_decreasing = true;
    for (int k = first; k + 1 < K; ++k) {
        const double se = std::hypot(fit.std_error[k], fit.std_error[k + 1]);
        Statistic st;
        st.label = "m(" + fmt(times[k + 1]) + ") - m(" + fmt(times[k]) + ")";
        st.value = fit.mean[k + 1] - fit.mean[k];
        st.std_error = se;
        st.threshold = z * se + roundoff(fit.mean[k]);
        st.n = b.n_paths;
        st.pass = st.value <= st.threshold;
        fit.eventually_decreasing = fit.eventually_decreasing && st.pass;
        rep.add(std::move(st));
    }

    // weighted least squares of log m on t; var(log m) ~ (se/m)^2
    double sw = 0, st_ = 0, sl = 0, stt = 0, stl = 0;
    bool positive = true;
    for (int k = first; k < K; ++k) {
        const double m = fit.mean[k];
        if (!(m > 0.0)) {
            positive = false;
            break;
        }
        const double rel = fit.std_error[k] / m;
        const double w = 1.0 / std::max(rel * rel, 1e-24);
        const double l = std::log(m);
        sw += w;
        st_ += w * times[k];
        sl += w * l;
        stt += w * times[k] * times[k];
        stl += w * times[k] * l;
    }
    Statistic rate;
    rate.label = "tail decay rate r";
    rate.n = b.n_paths;
    if (positive) {
        const double den = sw * stt - st_ * st_;
        if (den > 0.0) {
            fit.rate = -(sw * stl - st_ * sl) / den;
            fit.rate_se = std::sqrt(sw / den);
        }
        rate.value = fit.rate;
        rate.std_error = fit.rate_se;
        rate.threshold = z * fit.rate_se;
        rate.pass = den > 0.0 && fit.rate - z * fit.rate_se > 0.0;
    } else {
        // m(t) reached zero: nothing is left to decay
        rate.value = std::numeric_limits<double>::infinity();
        rate.pass = true;
        rep.notes.push_back("discounted expectation reached zero on the tail");
    }
    rep.add(rate);
    if (fit_out)
        *fit_out = std::move(fit);
    return rep;
}

TestReport h2_integrability_check(const PathBundle& b, double p)
{
    if (!b.has_characteristics)
        throw Error("h2 check needs recorded characteristics");
    TestReport rep;
    rep.name = "h2-integrability";
    const int last = b.n_records - 1;
    long bad = 0;
    std::vector<double> mom(b.n_paths);
    for (int path = 0; path < b.n_paths; ++path) {
        const double v = b.admissibility[b.at(path, last)];
        const bool ok = std::isfinite(v) && !b.diverged[path] && !b.violated[path];
        bad += ok ? 0 : 1;
        mom[path] = ok ? std::pow(v, 0.5 * p) : std::numeric_limits<double>::infinity();
    }
    Statistic finite;
    finite.label = "paths with infinite or uncertified integral";
    finite.value = static_cast<double>(bad);
    finite.n = b.n_paths;
    finite.pass = bad == 0;
    rep.add(finite);

    const auto [m, se] = mean_se(mom);
    Statistic moment;
    moment.label = "E[(int Q ds)^(p/2)] at T=" + fmt(b.times.back());
    moment.value = m;
    moment.std_error = se;
    moment.threshold = std::numeric_limits<double>::max();
    moment.n = b.n_paths;
    moment.pass = std::isfinite(m) && std::isfinite(se);
    rep.add(moment);
    return rep;
}

TestReport growth_certificate_check(const PolicyField& policy, const Vec& lo, const Vec& hi, int points_per_axis,
                                    double K, double p)
{
    const int n = policy.dim();
    if (lo.size() != n || hi.size() != n || points_per_axis < 2)
        throw Error("growth check needs a probe box of the policy dimension and >= 2 points per axis");
    TestReport rep;
    rep.name = "growth-certificate";
    long total = 1;
    for (int d = 0; d < n; ++d)
        total *= points_per_axis;
    double worst = -std::numeric_limits<double>::infinity();
    Vec worst_x = lo;
    long fails = 0;
    Action a;
    Vec x(n);
    for (long k = 0; k < total; ++k) {
        long rest = k;
        for (int d = 0; d < n; ++d) {
            const int i = static_cast<int>(rest % points_per_axis);
            rest /= points_per_axis;
            x[d] = lo[d] + (hi[d] - lo[d]) * i / (points_per_axis - 1);
        }
        policy.eval(x, a);
        const double lhs = growth_lhs(a, p);
        const double rhs = K * (1.0 + std::pow(x.norm(), p));
        const double excess = lhs - rhs;
        if (!(excess <= roundoff(rhs)))
            ++fails;
        if (excess > worst || std::isnan(excess)) {
            worst = excess;
            worst_x = x;
        }
    }
    Statistic st;
    st.label = "max of lhs - K(1+|x|^p) over probe lattice";
    st.value = worst;
    st.threshold = 0.0;
    st.n = total;
    st.pass = fails == 0;
    rep.add(st);
    std::ostringstream os;
    os << "worst probe x = [";
    for (int d = 0; d < n; ++d)
        os << (d ? ", " : "") << worst_x[d];
    os << "], K = " << K << ", p = " << p;
    rep.notes.push_back(os.str());
    return rep;
}

TestReport dynkin_test(const PolicyField& policy, const std::vector<ScalarField>& tests,
                       const std::vector<double>& times, SimConfig cfg, double z)
{
    if (tests.empty() || times.empty())
        throw Error("dynkin test needs test functions and times");
    cfg.T = *std::max_element(times.begin(), times.end());
    const Vec u = cfg.u.size() == cfg.x0.size() ? cfg.u : Vec::Zero(cfg.x0.size());
    PathFunctionals fn;
    for (const auto& g : tests) {
        fn.observables.push_back([g](const Vec& x) { return g(x); });
        fn.integrands.push_back([g, u](const Vec& x, const Action& a) { return apply_generator(a, g, x, u); });
    }
    const PathBundle b = simulate(policy, cfg, fn);
    TestReport rep;
    rep.name = "dynkin";
    const int m = static_cast<int>(tests.size());
    std::vector<double> d(b.n_paths);
    for (int j = 0; j < m; ++j) {
        const double g0 = tests[j](cfg.x0);
        for (double t : times) {
            const int r = record_index(b.times, t);
            for (int p = 0; p < b.n_paths; ++p) {
                const std::size_t i = b.at(p, r);
                d[p] = b.observables[i * m + j] - g0 - b.integrals[i * m + j];
            }
            const auto [mean, se] = mean_se(d);
            Statistic st;
            st.label = "g" + std::to_string(j) + " t=" + fmt(b.times[r]);
            st.value = mean;
            st.std_error = se;
            st.threshold = z * se + roundoff(g0);
            st.n = b.n_paths;
            st.pass = std::abs(mean) <= st.threshold;
            rep.add(std::move(st));
        }
    }
    return rep;
}

std::vector<MomentRatioPoint> moment_bound_ratio(const PathBundle& b, double q)
{
    if (!b.has_characteristics)
        throw Error("moment ratio needs recorded characteristics");
    int slot = -1;
    for (std::size_t j = 0; j < b.moment_orders.size(); ++j)
        if (b.moment_orders[j] == q)
            slot = static_cast<int>(j);
    if (slot < 0)
        throw Error("moment order " + fmt(q) + " was not recorded");
    const std::size_t k = b.moment_orders.size();
    std::vector<MomentRatioPoint> out;
    std::vector<double> num(b.n_paths), g(b.n_paths), h(b.n_paths);
    for (int r = 1; r < b.n_records; ++r) {
        for (int p = 0; p < b.n_paths; ++p) {
            const std::size_t i = b.at(p, r);
            num[p] = std::pow(b.sup_jump[i], q);
            g[p] = std::pow(b.jump_energy[i], 0.5 * q);
            h[p] = b.big_jump_moment[i * k + slot];
        }
        MomentRatioPoint pt;
        pt.t = b.times[r];
        std::tie(pt.numerator, pt.numerator_se) = mean_se(num);
        pt.denominator = mean_se(g).first + mean_se(h).first;
        pt.ratio = pt.denominator > 0.0 ? pt.numerator / pt.denominator : std::numeric_limits<double>::infinity();
        out.push_back(pt);
    }
    return out;
}

}  // namespace jumpctl
