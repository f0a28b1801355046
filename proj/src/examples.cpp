#include "jumpctl/examples.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace jumpctl {

namespace {

int growth_degree(const Poly& f) { return std::max(2, f.degree()); }

void check_discount(double q)
{
    if (!(q > 0.0) || !std::isfinite(q))
        throw Error("discount q must be positive and finite");
}

}  // namespace

void Example1Spec::validate(double probe) const
{
    check_discount(q);
    if (!f.even(1e-12 * (1.0 + std::abs(f.coeff(0)))))
        throw Error("cost f must be symmetric");
    const int n = 201;
    const double h = 2.0 * probe / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double x = -probe + i * h;
        if (f(x) < 0.0)
            throw Error("cost f must be nonnegative");
        if (i > 0 && i + 1 < n) {
            const double d2 = f(x - h) - 2.0 * f(x) + f(x + h);
            if (d2 < -1e-10 * (1.0 + std::abs(f(x))))
                throw Error("cost f must be convex");
        }
    }
}

double example1_beta(const std::vector<JumpMeasure>& measures, double p)
{
    double beta = 0.0;
    for (const auto& m : measures)
        beta = std::max(beta, big_jump_moment(m, p));
    return beta;
}

Poly example1_psi_exact(const Poly& f, double q)
{
    check_discount(q);
    return resolvent_particular(f, q + 1.0);
}

Poly example1_value_exact(const Poly& f, double q)
{
    const Poly psi = example1_psi_exact(f, q);
    return psi + Poly::constant(psi(0.0) / q);
}

ValueField example1_psi(const Poly& f, double q, const Grid& grid, double tol)
{
    check_discount(q);
    if (grid.dim() != 1)
        throw Error("example 1 lives on a 1-D grid");
    const Poly P = resolvent_particular(f, q + 1.0);
    const Axis& ax = grid.axis(0);
    const int n = ax.n;
    const double h = ax.h();
    const double g = 2.0 * (q + 1.0);
    const double off = 1.0 - h * h * g / 12.0;
    const double dia = -(2.0 + 10.0 * h * h * g / 12.0);

    // Numerov for psi'' = g psi - 2 f, Dirichlet data from the polynomial tail.
    Vec psi(n);
    psi[0] = P(ax.lo);
    psi[n - 1] = P(ax.hi);
    const int m = n - 2;
    Vec lower = Vec::Constant(m, off), diag = Vec::Constant(m, dia), upper = Vec::Constant(m, off), rhs(m);
    for (int k = 0; k < m; ++k) {
        const int i = k + 1;
        const double s = -2.0 * (f(ax.coord(i - 1)) + 10.0 * f(ax.coord(i)) + f(ax.coord(i + 1)));
        rhs[k] = h * h / 12.0 * s;
    }
    rhs[0] -= off * psi[0];
    rhs[m - 1] -= off * psi[n - 1];
    // Thomas algorithm; the system is strictly diagonally dominant.
    for (int k = 1; k < m; ++k) {
        const double w = lower[k] / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    psi[m] = rhs[m - 1] / diag[m - 1];
    for (int k = m - 2; k >= 0; --k)
        psi[k + 1] = (rhs[k] - upper[k] * psi[k + 2]) / diag[k];

    // Exponential modes left in psi - P.
    const double kk = std::sqrt(g);
    Mat A(n, 2);
    Vec r(n);
    for (int i = 0; i < n; ++i) {
        const double x = ax.coord(i);
        A(i, 0) = std::exp(kk * (x - ax.hi));
        A(i, 1) = std::exp(-kk * (x - ax.lo));
        r[i] = psi[i] - P(x);
    }
    const Vec modes = A.colPivHouseholderQr().solve(r);
    const double scale = std::max(1.0, psi.cwiseAbs().maxCoeff());
    const double contamination = std::max(modes.cwiseAbs().maxCoeff(), r.cwiseAbs().maxCoeff()) / scale;
    if (!(contamination <= tol)) {
        std::ostringstream os;
        os << "psi carries an exponential tail mode: relative size " << contamination << " > " << tol;
        throw BoundaryError(os.str());
    }
    return ValueField(grid, psi, growth_degree(f));
}

ValueField example1_value(const ValueField& psi, double q)
{
    check_discount(q);
    const double psi0 = psi(Vec::Zero(psi.grid().dim()));
    return ValueField(psi.grid(), (psi.values().array() + psi0 / q).matrix(), psi.q_growth());
}

Action example1_action(const Vec& x)
{
    const int n = static_cast<int>(x.size());
    return Action{Mat::Identity(n, n), JumpMeasure::jump_to_origin(x), -x};
}

PolicyField example1_policy()
{
    return PolicyField::feedback(1, example1_action, "jump-to-origin", true).with_ids([](const Vec& x) {
        return x.squaredNorm() > 0.0 ? 1 : 0;
    });
}

HJBProblem example1_problem(const Example1Spec& spec)
{
    spec.validate();
    HJBProblem prob;
    prob.dim = 1;
    prob.actions.push_back(
        ActionFamily::constant("no-jump", Action::scalar(1.0, JumpMeasure::zero(1), 0.0), DriftMode::Fixed));
    prob.actions.push_back(ActionFamily{
        "jump-to-origin",
        [](const Vec& x) { return Action{Mat::Identity(1, 1), JumpMeasure::jump_to_origin(x), Vec::Zero(1)}; },
        DriftMode::Compensate});
    const Poly f = spec.f;
    prob.f = [f](const Vec& x, const Action&) { return f(x[0]); };
    const double q = spec.q;
    prob.q = [q](const Vec&, const Action&) { return q; };
    prob.q_lower = prob.q_upper = q;
    prob.p = std::max(2.0, spec.p);
    prob.q_growth = growth_degree(f);
    return prob;
}

Example2Phi::Example2Phi(const Poly& f, double q, double kappa, double b)
    : f_(f), q_(q), kappa_(kappa), b_(b)
{
    check_discount(q);
    if (!(b >= 0.0) || !std::isfinite(b))
        throw Error("free boundary candidate b must be finite and >= 0");
    if (!(kappa >= 0.0))
        throw Error("kappa must be >= 0");
    if (!f.even(1e-12 * (1.0 + std::abs(f.coeff(0)))))
        throw Error("cost f must be symmetric");
    p_in_ = resolvent_particular(f, q);
    p_out_ = resolvent_particular(f + Poly::constant(kappa), q + 1.0);
    k0_ = std::sqrt(2.0 * q);
    k1_ = std::sqrt(2.0 * (q + 1.0));

    const double e = std::exp(-2.0 * k0_ * b);
    const double sech = 2.0 * std::exp(-k0_ * b) / (1.0 + e);
    const double tanh = (1.0 - e) / (1.0 + e);
    const Poly din = p_in_.derivative(), dout = p_out_.derivative();
    Eigen::Matrix3d M;
    Eigen::Vector3d r;
    // unknowns (a, c, z)
    M << sech, 0.0, -1.0,                 // z = phi(0)
        1.0, -1.0, -1.0 / (q + 1.0),      // continuity at b
        k0_ * tanh, k1_, 0.0;             // derivative continuity at b
    r << -p_in_(0.0), p_out_(b) - p_in_(b), dout(b) - din(b);
    const Eigen::Vector3d s = M.fullPivLu().solve(r);
    a_ = s[0];
    c_ = s[1];
    z_ = s[2];
}

double Example2Phi::inner(double x, int order) const
{
    Poly P = p_in_;
    for (int k = 0; k < order; ++k)
        P = P.derivative();
    // cosh(k0 x)/cosh(k0 b) and sinh(k0 x)/cosh(k0 b) without overflow
    const double ratio = std::exp(k0_ * (x - b_)) / (1.0 + std::exp(-2.0 * k0_ * b_));
    const double em = std::exp(-2.0 * k0_ * x);
    const double hyper = (order % 2 == 0) ? ratio * (1.0 + em) : ratio * (1.0 - em);
    return P(x) + a_ * std::pow(k0_, order) * hyper;
}

double Example2Phi::outer(double x, int order) const
{
    Poly P = p_out_;
    for (int k = 0; k < order; ++k)
        P = P.derivative();
    const double shift = order == 0 ? z_ / (q_ + 1.0) : 0.0;
    return P(x) + shift + c_ * std::pow(-k1_, order) * std::exp(-k1_ * (x - b_));
}

double Example2Phi::eval(double x, int order) const
{
    const double ax = std::abs(x);
    const double v = ax < b_ ? inner(ax, order) : outer(ax, order);
    return (order % 2 == 1 && x < 0.0) ? -v : v;
}

double Example2Phi::c0_gap() const { return std::abs(inner(b_, 0) - outer(b_, 0)); }
double Example2Phi::c1_gap() const { return std::abs(inner(b_, 1) - outer(b_, 1)); }
double Example2Phi::c2_gap() const { return std::abs(inner(b_, 2) - outer(b_, 2)); }

double Example2Phi::ode_residual(double x_max, int n) const
{
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = x_max * i / (n - 1);
        const double fx = f_(x);
        double res;
        if (x < b_)
            res = 0.5 * inner(x, 2) - q_ * inner(x, 0) + fx;
        else
            res = 0.5 * outer(x, 2) - (q_ + 1.0) * outer(x, 0) + fx + kappa_ + z_;
        worst = std::max(worst, std::abs(res) / (1.0 + std::abs(fx)));
    }
    return worst;
}

ValueField Example2Phi::field(const Grid& grid) const
{
    if (grid.dim() != 1)
        throw Error("example 2 lives on a 1-D grid");
    Vec v(grid.size());
    for (int i = 0; i < grid.size(); ++i)
        v[i] = (*this)(grid.point(i)[0]);
    return ValueField(grid, v, growth_degree(f_));
}

Example2Phi example2_phi_b(const Poly& f, double q, double kappa, double b) { return Example2Phi(f, q, kappa, b); }

Example2Solution example2_free_boundary(const Poly& f, double q, double kappa, const Grid& grid, double tol)
{
    if (!(kappa > 0.0))
        throw Error("kappa must be positive");
    if (grid.dim() != 1)
        throw Error("example 2 lives on a 1-D grid");
    auto g = [&](double b) { return Example2Phi(f, q, kappa, b).gap(); };

    std::vector<std::pair<double, double>> samples{{0.0, g(0.0)}};
    double lo = 0.0, hi = 1.0;
    const double cap = std::ldexp(1.0, 20);
    for (;;) {
        const double gh = g(hi);
        samples.push_back({hi, gh});
        if (gh > 0.0)
            break;
        lo = hi;
        hi *= 2.0;
        if (hi > cap) {
            std::ostringstream os;
            os << "no sign change of phi_b(b) - phi_b(0) - kappa on [0, 2^20]; samples:";
            for (const auto& [b, v] : samples)
                os << " (" << b << ", " << v << ")";
            throw BracketError(os.str());
        }
    }

    double best_b = hi, best_g = samples.back().second;
    int steps = 0;
    for (; steps < 400 && std::abs(best_g) > 0.01 * tol && hi - lo > 1e-15 * std::max(1.0, hi); ++steps) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (std::abs(gm) < std::abs(best_g)) {
            best_b = mid;
            best_g = gm;
        }
        (gm > 0.0 ? hi : lo) = mid;
    }

    Example2Phi phi(f, q, kappa, best_b);
    const double h = grid.spacing();
    const double b = best_b;
    const double d2_in = (phi(b) - 2.0 * phi(b - h) + phi(b - 2.0 * h)) / (h * h);
    const double d2_out = (phi(b) - 2.0 * phi(b + h) + phi(b + 2.0 * h)) / (h * h);
    double min_d = std::numeric_limits<double>::infinity();
    const Axis& ax = grid.axis(0);
    for (int i = 0; i < ax.n; ++i) {
        const double x = ax.coord(i);
        if (x >= 0.0)
            min_d = std::min(min_d, phi.derivative(x));
    }
    const double dscale = 1e-10 * std::max(1.0, std::abs(phi.derivative(ax.hi)));

    Example2Solution s{.b_hat = b, .phi = phi, .field = phi.field(grid), .bracket_samples = {}};
    s.gap = phi.gap();
    s.c1_gap = phi.c1_gap();
    s.c2_gap = phi.c2_gap();
    s.c2_gap_grid = std::abs(d2_in - d2_out);
    s.min_derivative = min_d;
    s.increasing = min_d >= -dscale;
    s.bisection_steps = steps;
    s.bracket_samples = std::move(samples);
    return s;
}

HJBProblem example2_problem(const Poly& f, double q, double kappa)
{
    check_discount(q);
    if (!(kappa > 0.0))
        throw Error("kappa must be positive");
    HJBProblem prob;
    prob.dim = 1;
    prob.actions.push_back(
        ActionFamily::constant("no-jump", Action::scalar(1.0, JumpMeasure::zero(1), 0.0), DriftMode::Fixed));
    prob.actions.push_back(ActionFamily{
        "jump-to-origin",
        [](const Vec& x) { return Action{Mat::Identity(1, 1), JumpMeasure::jump_to_origin(x), Vec::Zero(1)}; },
        DriftMode::Compensate});
    prob.f = [f, kappa](const Vec& x, const Action& a) { return f(x[0]) + kappa * a.nu.node_mass(); };
    prob.q = [q](const Vec&, const Action&) { return q; };
    prob.q_lower = prob.q_upper = q;
    prob.p = std::max(2.0, static_cast<double>(f.degree()));
    prob.q_growth = growth_degree(f);
    return prob;
}

double example2_switch_point(const PolicyTable& pol)
{
    const Axis& ax = pol.grid.axis(0);
    for (int i = 0; i < ax.n; ++i)
        if (ax.coord(i) >= 0.0 && pol.family[i] == 1)
            return ax.coord(i);
    return std::numeric_limits<double>::infinity();
}

DiagonalLQ example3_diagonal(double lambda, double theta, double q, double u, double tilde_delta)
{
    check_discount(q);
    if (!(theta > 0.0) || !(lambda >= 0.0))
        throw Error("need lambda >= 0 and theta > 0");
    DiagonalLQ r;
    r.p = std::sqrt(q * q + 4.0 * lambda / theta);
    const double pq = r.p + q, mq = r.p - q;
    r.B = 0.5 * theta * mq;
    r.c = 8.0 * lambda * u / (pq * pq);
    r.d = u * u * (8.0 * lambda - theta * mq * mq) / (q * pq * pq) + theta * tilde_delta * mq / (2.0 * q);
    return r;
}

}  // namespace jumpctl
