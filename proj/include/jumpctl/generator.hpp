#pragma once

#include "jumpctl/grid.hpp"
#include "jumpctl/measures.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace jumpctl {

/// A scalar function on R^n: either analytic (with optional exact derivatives)
/// or grid samples with polynomial tail extension.
class ScalarField {
public:
    using Fn = std::function<double(const Vec&)>;
    using GradFn = std::function<Vec(const Vec&)>;
    using HessFn = std::function<Mat(const Vec&)>;

    /// growth < 0 means unknown (no growth check against the moment order).
    static ScalarField analytic(int dim, Fn f, GradFn grad = {}, HessFn hess = {}, int growth = -1);
    static ScalarField from_grid(ValueField field);

    /// Restrict an analytic field to a box; evaluation outside throws DomainError.
    ScalarField with_domain(Vec lo, Vec hi) const;

    int dim() const { return dim_; }
    int growth() const { return growth_; }
    bool is_grid() const { return field_ != nullptr; }
    const ValueField* field() const { return field_.get(); }
    bool has_gradient() const { return static_cast<bool>(grad_); }
    bool has_hessian() const { return static_cast<bool>(hess_); }

    double operator()(const Vec& x) const;
    /// Exact derivatives when supplied, otherwise central differences with
    /// step `h` (h <= 0 picks the default step).
    Vec gradient(const Vec& x, double h = 0.0) const;
    Mat hessian(const Vec& x, double h = 0.0) const;

private:
    void check_domain(const Vec& x) const;

    int dim_ = 1;
    int growth_ = -1;
    Fn f_;
    GradFn grad_;
    HessFn hess_;
    std::shared_ptr<const ValueField> field_;
    std::optional<std::pair<Vec, Vec>> domain_;
};

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);

struct GeneratorScheme {
    double fd_step = 0.0;           // <= 0: automatic
    double small_jump_split = -1.0; // < 0: 2 * grid spacing for grid fields, 0 for analytic fields
    double moment_order = 0.0;      // ambient p for the growth check; <= 0 disables it
};

/// Default central-difference steps for the gradient and the Hessian at x.
double gradient_step(const Vec& x);
double hessian_step(const Vec& x);

/// (u + mu)^T grad g(x) + tr(sigma^T Hess g(x) sigma) / 2.
double local_term(const Vec& mu, const Mat& sigma, const ScalarField& g, const Vec& x, const Vec& u,
                  const GeneratorScheme& scheme = {});

/// Integral of g(x+y) - g(x) - y . grad g(x) against nu, with the second-order
/// Taylor surrogate for |y| <= small_jump_split and the small-jump covariance.
double jump_term(const JumpMeasure& nu, const ScalarField& g, const Vec& x, const GeneratorScheme& scheme = {});

/// L^a g(x).
double apply_generator(const Action& a, const ScalarField& g, const Vec& x, const Vec& u,
                       const GeneratorScheme& scheme = {});

/// L^a phi(x) - q phi(x) + f.
double hjb_integrand(const Action& a, const ScalarField& phi, const Vec& x, double f_val, double q_val,
                     const Vec& u, const GeneratorScheme& scheme = {});

}  // namespace jumpctl
