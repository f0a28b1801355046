#include "jumpctl/lq.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

namespace jumpctl {

namespace {

void require_spd(const Mat& m, const char* what)
{
    if (m.rows() != m.cols() || m.rows() < 1)
        throw Error(std::string(what) + " must be a non-empty square matrix");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw Error(std::string(what) + " must be symmetric");
    if (!(Eigen::SelfAdjointEigenSolver<Mat>(m).eigenvalues().minCoeff() > 0.0))
        throw Error(std::string(what) + " must be positive definite");
}

std::string spectrum_text(const Eigen::VectorXcd& ev)
{
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < ev.size(); ++i)
        os << (i ? ", " : "") << ev[i].real() << (ev[i].imag() >= 0 ? "+" : "") << ev[i].imag() << "i";
    os << "]";
    return os.str();
}

}  // namespace

void LQSpec::validate() const
{
    require_spd(Lambda, "Lambda");
    require_spd(Theta, "Theta");
    if (Lambda.rows() != Theta.rows())
        throw Error("Lambda and Theta dimension mismatch");
    if (!(q > 0.0))
        throw Error("discount q must be positive");
    if (u.size() != 0 && u.size() != dim())
        throw Error("u dimension mismatch");
    if (candidates.empty())
        throw Error("dispersion candidate list is empty");
    for (const auto& c : candidates) {
        if (c.sigma.rows() != dim() || c.sigma.cols() != dim() || !c.sigma.allFinite())
            throw Error("candidate '" + c.name + "': sigma must be a finite n x n matrix");
        if (c.nu.dim() != dim())
            throw Error("candidate '" + c.name + "': measure dimension mismatch");
        if (!validate_mp(c.nu, 2.0))
            throw Error("candidate '" + c.name + "': measure is not in M_2");
    }
}

LQSpec LQSpec::scalar(double lambda, double theta, double q, double u, double sigma)
{
    LQSpec s;
    s.Lambda = Mat::Constant(1, 1, lambda);
    s.Theta = Mat::Constant(1, 1, theta);
    s.q = q;
    s.u = Vec::Constant(1, u);
    s.candidates.push_back({"sigma", Mat::Constant(1, 1, sigma), JumpMeasure::zero(1)});
    return s;
}

double riccati_residual(const Mat& B, const Mat& Lambda, const Mat& Theta, double q)
{
    const Mat F = B * Theta.llt().solve(B) + q * B - Lambda;
    return F.norm();
}

Mat solve_riccati(const Mat& Lambda, const Mat& Theta, double q, RiccatiReport* report)
{
    require_spd(Lambda, "Lambda");
    require_spd(Theta, "Theta");
    if (!(q > 0.0))
        throw Error("discount q must be positive");
    const int n = static_cast<int>(Lambda.rows());
    const Mat Ti = Theta.llt().solve(Mat::Identity(n, n));

    Mat H(2 * n, 2 * n);
    H << -0.5 * q * Mat::Identity(n, n), -Ti, -Lambda, 0.5 * q * Mat::Identity(n, n);
    Eigen::EigenSolver<Mat> es(H);
    if (es.info() != Eigen::Success)
        throw SolvabilityError("Hamiltonian eigen-decomposition failed");
    const Eigen::VectorXcd ev = es.eigenvalues();
    const Eigen::MatrixXcd V = es.eigenvectors();
    Eigen::MatrixXcd U(2 * n, n);
    int k = 0;
    for (int i = 0; i < 2 * n; ++i) {
        if (ev[i].real() < 0.0) {
            if (k == n)
                throw SolvabilityError("Hamiltonian has more than n stable eigenvalues: " + spectrum_text(ev));
            U.col(k++) = V.col(i);
        }
    }
    if (k != n)
        throw SolvabilityError("Hamiltonian stable subspace has wrong dimension: " + spectrum_text(ev));
    const Eigen::MatrixXcd U1 = U.topRows(n), U2 = U.bottomRows(n);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(U1);
    if (!(std::abs(lu.determinant()) > 1e-14))
        throw SolvabilityError("stable subspace is not a graph over the state space: " + spectrum_text(ev));
    const Eigen::MatrixXcd Xc = U2 * lu.inverse();
    Mat B = Xc.real();
    B = 0.5 * (B + B.transpose());

    // Newton refinement: (B Ti + q/2) D + D (Ti B + q/2) = -F(B).
    const double target = 1e-12 * std::max(1.0, Lambda.norm());
    int steps = 0;
    for (; steps < 50; ++steps) {
        const Mat F = B * Ti * B + q * B - Lambda;
        if (F.norm() <= target)
            break;
        const Mat K = Ti * B + 0.5 * q * Mat::Identity(n, n);
        // column j of the Sylvester operator is vec(K^T E + E K) for the j-th unit matrix E
        Mat S(n * n, n * n);
        for (int j = 0; j < n * n; ++j) {
            Mat E = Mat::Zero(n, n);
            E.data()[j] = 1.0;
            const Mat img = K.transpose() * E + E * K;
            S.col(j) = Eigen::Map<const Vec>(img.data(), n * n);
        }
        const Vec rhs = -Eigen::Map<const Vec>(F.data(), n * n);
        const Vec dvec = S.fullPivLu().solve(rhs);
        Mat D = Eigen::Map<const Mat>(dvec.data(), n, n);
        B += 0.5 * (D + D.transpose());
    }
    const double res = riccati_residual(B, Lambda, Theta, q);
    if (report) {
        report->spectrum = ev;
        report->residual = res;
        report->newton_steps = steps;
    }
    const double min_eig = Eigen::SelfAdjointEigenSolver<Mat>(B).eigenvalues().minCoeff();
    if (!(min_eig > 1e-12))
        throw SolvabilityError("Riccati solution is not positive definite; spectrum " + spectrum_text(ev));
    return B;
}

Dispersion minimal_dispersion(const std::vector<DispersionCandidate>& candidates, const Mat& B)
{
    if (candidates.empty())
        throw Error("dispersion candidate list is empty");
    Dispersion d;
    d.delta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        const auto& c = candidates[k];
        const double v = (c.sigma.transpose() * B * c.sigma).trace() + (B * second_moment_matrix(c.nu)).trace();
        d.values.push_back(v);
        if (v < d.delta) {
            d.delta = v;
            d.index = static_cast<int>(k);
        }
    }
    return d;
}

LQSolution lq_assemble(const LQSpec& spec, const Mat& B, const Dispersion& disp)
{
    const int n = spec.dim();
    LQSolution s;
    s.B = B;
    s.u = spec.u.size() == n ? spec.u : Vec::Zero(n);
    s.Lambda = spec.Lambda;
    s.Theta = spec.Theta;
    s.q = spec.q;
    const auto Ti = spec.Theta.llt();
    s.P = B * spec.Lambda.llt().solve(B);
    s.c = 2.0 * s.P.transpose() * s.u;
    s.d = (2.0 * s.u.dot(s.P.transpose() * s.u) + disp.delta - s.u.dot(s.P * Ti.solve(s.P.transpose() * s.u))) /
          spec.q;
    s.Q = Ti.solve(B);
    s.v = -Ti.solve(s.P * s.u);
    s.delta_hat = disp.delta;
    s.chosen = disp.index;
    s.sigma_hat = spec.candidates[disp.index].sigma;
    s.nu_hat = spec.candidates[disp.index].nu;
    s.riccati_residual = riccati_residual(B, spec.Lambda, spec.Theta, spec.q);
    return s;
}

LQSolution solve_lq(const LQSpec& spec)
{
    spec.validate();
    const Mat B = solve_riccati(spec.Lambda, spec.Theta, spec.q);
    return lq_assemble(spec, B, minimal_dispersion(spec.candidates, B));
}

Vec optimal_feedback(const Vec& x, const LQSolution& sol) { return sol.feedback(x); }

ScalarField LQSolution::value_field() const
{
    const Mat Bc = B;
    const Vec cc = c;
    const double dc = d;
    return ScalarField::analytic(
        static_cast<int>(B.rows()), [Bc, cc, dc](const Vec& x) { return x.dot(Bc * x) + cc.dot(x) + dc; },
        [Bc, cc](const Vec& x) -> Vec { return 2.0 * Bc * x + cc; }, [Bc](const Vec&) -> Mat { return 2.0 * Bc; },
        2);
}

PolicyField LQSolution::policy(double eps) const
{
    const double s = 1.0 + eps;
    return PolicyField::affine_drift(Action{sigma_hat, nu_hat, v * s}, -s * Q, s * v,
                                     eps == 0.0 ? "lq-optimal" : "lq-perturbed");
}

double LQSolution::growth_constant() const
{
    // |mu|^2 <= 2 (|Q|^2 |x|^2 + |v|^2)
    const double moments = nu_hat.nodes().empty() && !nu_hat.has_small_jump_cov() ? 0.0 : moment_functional(nu_hat, 2.0);
    const double qn = Q.norm();
    return 2.0 * (qn * qn + v.squaredNorm()) + sigma_hat.squaredNorm() + moments;
}

CostFn LQSolution::cost() const
{
    const Mat L = Lambda, T = Theta;
    return [L, T](const Vec& x, const Action& a) { return x.dot(L * x) + a.mu.dot(T * a.mu); };
}

CostFn LQSolution::discount() const
{
    const double qq = q;
    return [qq](const Vec&, const Action&) { return qq; };
}

HJBProblem lq_problem(const LQSpec& spec, const DriftLattice& lattice)
{
    spec.validate();
    HJBProblem prob;
    prob.dim = spec.dim();
    for (const auto& c : spec.candidates)
        prob.actions.push_back(
            ActionFamily::constant(c.name, Action{c.sigma, c.nu, Vec::Zero(spec.dim())}, DriftMode::Lattice));
    prob.drift_lattice = lattice;
    const Mat L = spec.Lambda, T = spec.Theta;
    prob.f = [L, T](const Vec& x, const Action& a) { return x.dot(L * x) + a.mu.dot(T * a.mu); };
    const double q = spec.q;
    prob.q = [q](const Vec&, const Action&) { return q; };
    prob.q_lower = prob.q_upper = spec.q;
    prob.u = spec.u.size() == spec.dim() ? spec.u : Vec::Zero(spec.dim());
    prob.p = 2.0;
    prob.q_growth = 2;
    return prob;
}

}  // namespace jumpctl
