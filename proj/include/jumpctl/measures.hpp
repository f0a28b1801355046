#pragma once

#include "jumpctl/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace jumpctl {

enum class MeasureKind { Zero, Atomic, DensityGrid };

struct Atom {
    Vec location;
    double mass = 0.0;
};

/// Density on a tensor lattice of cells over a box. Values are taken at cell
/// midpoints (midpoint quadrature); cells whose midpoint lies in the excluded
/// ball |y| <= excluded_radius are dropped and replaced by small_jump_cov.
struct DensityLattice {
    Vec lo;
    Vec hi;
    std::vector<int> cells;      // per axis
    std::vector<double> values;  // axis 0 varies fastest
    double excluded_radius = 0.0;
    Mat small_jump_cov;          // integral of y y^T over the excluded ball; empty means zero
};

/// A jump intensity measure on R^n \ {0}. Immutable once built; safe to share
/// across threads. Construction never throws on support defects so that
/// validate_mp can report them as structural errors.
class JumpMeasure {
public:
    JumpMeasure() : mean_(Vec::Zero(1)) { small_cov_ = Mat::Zero(1, 1); }

    static JumpMeasure zero(int dim);
    static JumpMeasure atomic(std::vector<Atom> atoms);
    static JumpMeasure atomic_1d(std::initializer_list<std::pair<double, double>> atoms);
    static JumpMeasure density(DensityLattice lattice);
    static JumpMeasure density_from(const std::function<double(const Vec&)>& density, const Vec& lo,
                                    const Vec& hi, std::vector<int> cells, double excluded_radius = 0.0,
                                    Mat small_jump_cov = {});
    /// rate * delta_{-from}: the jump that sends the state at `from` to the
    /// origin. Zero measure when `from` is already the origin.
    static JumpMeasure jump_to_origin(const Vec& from, double rate = 1.0);

    MeasureKind kind() const { return kind_; }
    int dim() const { return dim_; }

    /// Quadrature view: atoms for Atomic, weighted cell midpoints for DensityGrid.
    const std::vector<Atom>& nodes() const { return nodes_; }
    const DensityLattice* lattice() const { return lattice_ ? &*lattice_ : nullptr; }
    const Mat& small_jump_cov() const { return small_cov_; }
    bool has_small_jump_cov() const { return has_small_cov_; }

    bool well_formed() const { return defect_.empty(); }
    const std::string& defect() const { return defect_; }
    void require_well_formed() const;

    /// Cached quadrature sums over nodes().
    double node_mass() const { return mass_; }
    const Vec& node_mean() const { return mean_; }

    JumpMeasure scaled(double c) const;

private:
    void finalize();

    MeasureKind kind_ = MeasureKind::Zero;
    int dim_ = 1;
    std::vector<Atom> nodes_;
    std::optional<DensityLattice> lattice_;
    Mat small_cov_;
    bool has_small_cov_ = false;
    std::string defect_;
    double mass_ = 0.0;
    Vec mean_;
    std::vector<double> cumulative_;
    std::vector<int> node_cell_;  // lattice cell index of each node (density only)

    friend Vec sample_jump(const JumpMeasure& nu, Rng& rng);
};

/// Control action (sigma, nu, mu): dispersion, jump measure, drift.
struct Action {
    Mat sigma;
    JumpMeasure nu;
    Vec mu;

    static Action make(Mat sigma, JumpMeasure nu, Vec mu) { return {std::move(sigma), std::move(nu), std::move(mu)}; }
    static Action scalar(double sigma, JumpMeasure nu, double mu);
    int dim() const { return static_cast<int>(mu.size()); }
};

/// Membership in M_p: integral of |y|^2 v |y|^p is finite. Throws
/// StructuralError on malformed support; returns false on divergence.
bool validate_mp(const JumpMeasure& nu, double p);

/// Integral of max(|y|^2, |y|^p) nu(dy), exact for atoms, midpoint rule for
/// lattices, plus tr(small_jump_cov).
double moment_functional(const JumpMeasure& nu, double p);

/// M_ij = integral of y_i y_j nu(dy).
Mat second_moment_matrix(const JumpMeasure& nu);

struct MassReport {
    double value = 0.0;
    bool unbounded_warning = false;  // lattice reaches the origin with no excluded ball
};
MassReport total_mass(const JumpMeasure& nu);

/// Integral of |y|^q over {|y| > 1}.
double big_jump_moment(const JumpMeasure& nu, double q);

/// Integral of (y - y 1{|y|<=1}) nu(dy), the part of the drift outside the
/// truncation function.
Vec big_jump_mean(const JumpMeasure& nu);

/// Draws y ~ nu / nu(R^n). Categorical over atoms; for lattices a categorical
/// cell draw followed by uniform jitter inside the cell.
Vec sample_jump(const JumpMeasure& nu, Rng& rng);

}  // namespace jumpctl
