#pragma once

#include "jumpctl/dynamics.hpp"
#include "jumpctl/generator.hpp"
#include "jumpctl/hjb.hpp"
#include "jumpctl/measures.hpp"

#include <string>
#include <vector>

namespace jumpctl {

/// One (sigma, nu) pair the controller may select.
struct DispersionCandidate {
    std::string name;
    Mat sigma;
    JumpMeasure nu;
};

/// Running cost x^T Lambda x + mu^T Theta mu, discount q, drift offset u.
struct LQSpec {
    Mat Lambda;
    Mat Theta;
    double q = 1.0;
    Vec u;
    std::vector<DispersionCandidate> candidates;

    int dim() const { return static_cast<int>(Lambda.rows()); }
    void validate() const;
    static LQSpec scalar(double lambda, double theta, double q, double u = 0.0, double sigma = 1.0);
};

struct RiccatiReport {
    Eigen::VectorXcd spectrum;  // Hamiltonian eigenvalues
    double residual = 0.0;
    int newton_steps = 0;
};

/// Symmetric positive definite B with B Theta^-1 B + q B - Lambda = 0, from the
/// stable invariant subspace of [[-q/2 I, -Theta^-1], [-Lambda, q/2 I]] followed
/// by Newton refinement.
Mat solve_riccati(const Mat& Lambda, const Mat& Theta, double q, RiccatiReport* report = nullptr);
double riccati_residual(const Mat& B, const Mat& Lambda, const Mat& Theta, double q);

struct Dispersion {
    double delta = 0.0;
    int index = 0;
    std::vector<double> values;
};

/// argmin over the candidates of tr(sigma^T B sigma) + int y^T B y nu(dy).
Dispersion minimal_dispersion(const std::vector<DispersionCandidate>& candidates, const Mat& B);

struct LQSolution {
    Mat B;
    Vec c;
    double d = 0.0;
    Mat Q;
    Vec v;
    Mat P;
    double delta_hat = 0.0;
    int chosen = 0;
    Mat sigma_hat;
    JumpMeasure nu_hat;
    Vec u;
    Mat Lambda;
    Mat Theta;
    double q = 1.0;
    double riccati_residual = 0.0;

    double value(const Vec& x) const { return x.dot(B * x) + c.dot(x) + d; }
    Vec feedback(const Vec& x) const { return -Q * x + v; }
    Action action(const Vec& x) const { return {sigma_hat, nu_hat, feedback(x)}; }
    ScalarField value_field() const;
    /// Optimal policy, optionally with drift scaled by (1 + eps).
    PolicyField policy(double eps = 0.0) const;
    /// K for the growth certificate |mu|^2 + |sigma|^2 + moments <= K (1 + |x|^2).
    double growth_constant() const;
    CostFn cost() const;
    CostFn discount() const;
};

LQSolution lq_assemble(const LQSpec& spec, const Mat& B, const Dispersion& disp);
LQSolution solve_lq(const LQSpec& spec);

/// -Q x + v.
Vec optimal_feedback(const Vec& x, const LQSolution& sol);

/// The same control problem posed for the grid solver: every candidate is an
/// action family whose drift ranges over `lattice`.
HJBProblem lq_problem(const LQSpec& spec, const DriftLattice& lattice);

}  // namespace jumpctl
