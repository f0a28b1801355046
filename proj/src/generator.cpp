#include "jumpctl/generator.hpp"

#include <algorithm>
#include <cmath>

namespace jumpctl {

double gradient_step(const Vec& x) { return std::max(1e-5, 1e-7 * x.norm()); }

// Second differences lose half the digits of first differences, so the
// Hessian needs a larger step than the gradient to stay out of roundoff.
double hessian_step(const Vec& x) { return std::max(1e-4, 1e-4 * x.norm()); }

ScalarField ScalarField::analytic(int dim, Fn f, GradFn grad, HessFn hess, int growth)
{
    if (dim < 1)
        throw Error("field dimension must be positive");
    ScalarField s;
    s.dim_ = dim;
    s.f_ = std::move(f);
    s.grad_ = std::move(grad);
    s.hess_ = std::move(hess);
    s.growth_ = growth;
    return s;
}

ScalarField ScalarField::from_grid(ValueField field)
{
    ScalarField s;
    s.dim_ = field.grid().dim();
    s.growth_ = field.q_growth();
    s.field_ = std::make_shared<const ValueField>(std::move(field));
    const ValueField* raw = s.field_.get();
    s.f_ = [raw](const Vec& x) { return (*raw)(x); };
    return s;
}

ScalarField ScalarField::with_domain(Vec lo, Vec hi) const
{
    if (lo.size() != dim_ || hi.size() != dim_)
        throw Error("domain box dimension mismatch");
    ScalarField s = *this;
    s.domain_ = std::make_pair(std::move(lo), std::move(hi));
    return s;
}

void ScalarField::check_domain(const Vec& x) const
{
    if (x.size() != dim_)
        throw DomainError("evaluation point has wrong dimension");
    if (!domain_)
        return;
    for (int d = 0; d < dim_; ++d)
        if (x[d] < domain_->first[d] || x[d] > domain_->second[d])
            throw DomainError("evaluation point outside the field's domain box");
}

double ScalarField::operator()(const Vec& x) const
{
    check_domain(x);
    return f_(x);
}

Vec ScalarField::gradient(const Vec& x, double h) const
{
    check_domain(x);
    if (grad_)
        return grad_(x);
    if (h <= 0.0)
        h = field_ ? field_->grid().spacing() : gradient_step(x);
    Vec g(dim_);
    Vec xp = x, xm = x;
    for (int d = 0; d < dim_; ++d) {
        xp[d] = x[d] + h;
        xm[d] = x[d] - h;
        g[d] = (f_(xp) - f_(xm)) / (2.0 * h);
        xp[d] = xm[d] = x[d];
    }
    return g;
}

Mat ScalarField::hessian(const Vec& x, double h) const
{
    check_domain(x);
    if (hess_)
        return hess_(x);
    if (h <= 0.0)
        h = field_ ? field_->grid().spacing() : hessian_step(x);
    Mat H(dim_, dim_);
    const double f0 = f_(x);
    Vec y = x;
    for (int i = 0; i < dim_; ++i) {
        y[i] = x[i] + h;
        const double fp = f_(y);
        y[i] = x[i] - h;
        const double fm = f_(y);
        y[i] = x[i];
        H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
        for (int j = 0; j < i; ++j) {
            double s = 0.0;
            for (int si : {1, -1})
                for (int sj : {1, -1}) {
                    y[i] = x[i] + si * h;
                    y[j] = x[j] + sj * h;
                    s += si * sj * f_(y);
                }
            y[i] = x[i];
            y[j] = x[j];
            H(i, j) = H(j, i) = s / (4.0 * h * h);
        }
    }
    return H;
}

ScalarField operator+(const ScalarField& a, const ScalarField& b)
{
    if (a.dim() != b.dim())
        throw Error("field dimension mismatch");
    ScalarField::GradFn grad;
    ScalarField::HessFn hess;
    if (a.has_gradient() && b.has_gradient())
        grad = [a, b](const Vec& x) -> Vec { return a.gradient(x) + b.gradient(x); };
    if (a.has_hessian() && b.has_hessian())
        hess = [a, b](const Vec& x) -> Mat { return a.hessian(x) + b.hessian(x); };
    const int growth = (a.growth() < 0 || b.growth() < 0) ? -1 : std::max(a.growth(), b.growth());
    return ScalarField::analytic(
        a.dim(), [a, b](const Vec& x) { return a(x) + b(x); }, grad, hess, growth);
}

ScalarField operator*(double s, const ScalarField& a)
{
    ScalarField::GradFn grad;
    ScalarField::HessFn hess;
    if (a.has_gradient())
        grad = [s, a](const Vec& x) -> Vec { return s * a.gradient(x); };
    if (a.has_hessian())
        hess = [s, a](const Vec& x) -> Mat { return s * a.hessian(x); };
    return ScalarField::analytic(
        a.dim(), [s, a](const Vec& x) { return s * a(x); }, grad, hess, a.growth());
}

namespace {

double split_radius(const ScalarField& g, const GeneratorScheme& scheme)
{
    if (scheme.small_jump_split >= 0.0)
        return scheme.small_jump_split;
    return g.is_grid() ? 2.0 * g.field()->grid().spacing() : 0.0;
}

double step_for(const ScalarField& g, const GeneratorScheme& scheme)
{
    if (scheme.fd_step > 0.0)
        return scheme.fd_step;
    return g.is_grid() ? g.field()->grid().spacing() : 0.0;
}

}  // namespace

double local_term(const Vec& mu, const Mat& sigma, const ScalarField& g, const Vec& x, const Vec& u,
                  const GeneratorScheme& scheme)
{
    const double h = step_for(g, scheme);
    Vec b = mu;
    if (u.size() == b.size())
        b += u;
    double v = b.dot(g.gradient(x, h));
    if (sigma.size() > 0 && sigma.cwiseAbs().maxCoeff() > 0.0) {
        const Mat H = g.hessian(x, h);
        v += 0.5 * (sigma.transpose() * H * sigma).trace();
    }
    return v;
}

double jump_term(const JumpMeasure& nu, const ScalarField& g, const Vec& x, const GeneratorScheme& scheme)
{
    nu.require_well_formed();
    if (nu.nodes().empty() && !nu.has_small_jump_cov())
        return 0.0;
    if (scheme.moment_order > 0.0 && g.growth() > scheme.moment_order)
        throw GrowthError("field growth degree exceeds the moment order of the jump measure class");
    const double delta = split_radius(g, scheme);
    const double h = step_for(g, scheme);
    const double g0 = g(x);
    const Vec grad = g.gradient(x, h);
    Mat H;
    auto hess = [&]() -> const Mat& {
        if (H.size() == 0)
            H = g.hessian(x, h);
        return H;
    };
    double sum = 0.0;
    Vec xy(x.size());
    for (const auto& a : nu.nodes()) {
        if (a.mass == 0.0)
            continue;
        if (a.location.norm() <= delta) {
            sum += 0.5 * a.mass * a.location.dot(hess() * a.location);
        } else {
            xy = x + a.location;
            sum += a.mass * (g(xy) - g0 - a.location.dot(grad));
        }
    }
    if (nu.has_small_jump_cov())
        sum += 0.5 * (hess() * nu.small_jump_cov()).trace();
    if (!std::isfinite(sum))
        throw DivergenceError("jump integral did not converge");
    return sum;
}

double apply_generator(const Action& a, const ScalarField& g, const Vec& x, const Vec& u,
                       const GeneratorScheme& scheme)
{
    return local_term(a.mu, a.sigma, g, x, u, scheme) + jump_term(a.nu, g, x, scheme);
}

double hjb_integrand(const Action& a, const ScalarField& phi, const Vec& x, double f_val, double q_val,
                     const Vec& u, const GeneratorScheme& scheme)
{
    return apply_generator(a, phi, x, u, scheme) - q_val * phi(x) + f_val;
}

}  // namespace jumpctl
