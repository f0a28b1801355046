#pragma once

#include "jumpctl/grid.hpp"
#include "jumpctl/hjb.hpp"
#include "jumpctl/polynomial.hpp"

#include <vector>

namespace jumpctl {

/// Convex jump-to-origin problem: cost f(x) symmetric and convex, Brownian
/// dispersion, any jump measure of total mass at most one.
struct Example1Spec {
    Poly f;
    double q = 1.0;
    double p = 2.0;  // moment order of the tail bound beta

    /// Symmetry, convexity and nonnegativity of f on a probe lattice; throws Error.
    void validate(double probe = 10.0) const;
};

/// sup over the supplied measures of the integral of |y|^p over |y| > 1.
double example1_beta(const std::vector<JumpMeasure>& measures, double p);

/// psi with psi''/2 - (q+1) psi + f = 0, polynomial growth at both ends.
/// Numerov on the grid with the polynomial particular solution as boundary
/// data; throws BoundaryError when the interior solution carries an
/// exponential mode above tol (relative to max |psi|).
ValueField example1_psi(const Poly& f, double q, const Grid& grid, double tol = 1e-6);

/// psi + psi(0)/q.
ValueField example1_value(const ValueField& psi, double q);

/// Closed forms: psi is the polynomial particular solution.
Poly example1_psi_exact(const Poly& f, double q);
Poly example1_value_exact(const Poly& f, double q);

/// Optimal action at x: sigma = 1, nu = delta_{-x}, drift compensating the jump.
Action example1_action(const Vec& x);
PolicyField example1_policy();

/// Grid problem with the two families {nu = 0} and {nu = delta_{-x}}, both
/// with sigma = 1 and compensating drift.
HJBProblem example1_problem(const Example1Spec& spec);

/// phi_b for Example 2: ODE pieces
///   phi''/2 - q phi + f = 0                        on |x| < b
///   phi''/2 - (q+1) phi + f + kappa + phi(0) = 0   on |x| > b
/// with C^1 matching at b, phi'(0) = 0 and polynomial growth. Closed form:
///   inner  P_in(x) + A cosh(k0 x)/cosh(k0 b),  k0 = sqrt(2q)
///   outer  P_out(x) + z/(q+1) + C exp(-k1 (|x| - b)),  k1 = sqrt(2(q+1))
/// where z = phi(0) enters affinely, so (A, C, z) solve one 3x3 system.
class Example2Phi {
public:
    Example2Phi(const Poly& f, double q, double kappa, double b);

    double b() const { return b_; }
    double phi0() const { return z_; }
    double operator()(double x) const { return eval(x, 0); }
    double derivative(double x) const { return eval(x, 1); }
    double second(double x) const { return eval(x, 2); }
    /// One-sided limits at b of phi and its first two derivatives.
    double inner(double x, int order) const;
    double outer(double x, int order) const;

    /// phi(b) - phi(0) - kappa.
    double gap() const { return inner(b_, 0) - z_ - kappa_; }
    double c0_gap() const;
    double c1_gap() const;
    double c2_gap() const;
    /// Max |ODE residual| on both pieces over [0, x_max] sampled at n points.
    double ode_residual(double x_max, int n = 401) const;

    ValueField field(const Grid& grid) const;

private:
    double eval(double x, int order) const;

    Poly f_;
    double q_;
    double kappa_;
    double b_;
    Poly p_in_;
    Poly p_out_;
    double k0_;
    double k1_;
    double a_ = 0.0;  // cosh coefficient, scaled by 1/cosh(k0 b)
    double c_ = 0.0;
    double z_ = 0.0;
};

Example2Phi example2_phi_b(const Poly& f, double q, double kappa, double b);

struct Example2Solution {
    double b_hat = 0.0;
    Example2Phi phi;
    ValueField field;
    double gap = 0.0;          // phi(b) - phi(0) - kappa
    double c1_gap = 0.0;
    double c2_gap = 0.0;       // from the closed form, equals 2 |gap|
    double c2_gap_grid = 0.0;  // one-sided second differences at grid spacing
    bool increasing = false;   // phi' >= 0 on [0, x_max]
    double min_derivative = 0.0;
    int bisection_steps = 0;
    std::vector<std::pair<double, double>> bracket_samples;  // (b, g(b)) while bracketing
};

/// Free boundary b with phi_b(b) - phi_b(0) = kappa, by bracketing (b_hi
/// doubled up to 2^20) and bisection to |g| <= tol. Throws BracketError.
Example2Solution example2_free_boundary(const Poly& f, double q, double kappa, const Grid& grid,
                                        double tol = 1e-8);

/// Families {a = 0: sigma = 1, nu = 0} and {a = 1: sigma = 1, nu = delta_{-x},
/// compensating drift}, cost f + kappa * nu(R).
HJBProblem example2_problem(const Poly& f, double q, double kappa);

/// Smallest nonnegative grid coordinate at which the policy selects the jump family.
double example2_switch_point(const PolicyTable& pol);

/// Diagonal quadratic case Lambda = lambda I, Theta = theta I in one
/// dimension, with dispersion sum tilde_delta (so delta_hat = B * tilde_delta).
struct DiagonalLQ {
    double p = 0.0;  // sqrt(q^2 + 4 lambda / theta)
    double B = 0.0;
    double c = 0.0;
    double d = 0.0;
};
DiagonalLQ example3_diagonal(double lambda, double theta, double q, double u, double tilde_delta);

}  // namespace jumpctl
