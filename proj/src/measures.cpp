#include "jumpctl/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace jumpctl {

JumpMeasure JumpMeasure::zero(int dim)
{
    if (dim < 1)
        throw StructuralError("measure dimension must be positive");
    JumpMeasure m;
    m.dim_ = dim;
    m.small_cov_ = Mat::Zero(dim, dim);
    m.finalize();
    return m;
}

JumpMeasure JumpMeasure::atomic(std::vector<Atom> atoms)
{
    if (atoms.empty())
        throw StructuralError("atomic measure needs at least one atom (use zero())");
    JumpMeasure m;
    m.kind_ = MeasureKind::Atomic;
    m.dim_ = static_cast<int>(atoms.front().location.size());
    if (m.dim_ < 1)
        throw StructuralError("atom location has dimension 0");
    m.small_cov_ = Mat::Zero(m.dim_, m.dim_);
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        const auto& a = atoms[k];
        std::ostringstream where;
        where << "atoms[" << k << "]";
        if (a.location.size() != m.dim_)
            throw StructuralError(where.str() + ": dimension mismatch");
        if (m.defect_.empty()) {
            if (!a.location.allFinite())
                m.defect_ = where.str() + ": non-finite location";
            else if (a.location.squaredNorm() == 0.0)
                m.defect_ = where.str() + ": atom at the origin (support must exclude 0)";
            else if (!std::isfinite(a.mass) || a.mass < 0.0)
                m.defect_ = where.str() + ": mass must be finite and >= 0";
        }
    }
    m.nodes_ = std::move(atoms);
    m.finalize();
    return m;
}

JumpMeasure JumpMeasure::atomic_1d(std::initializer_list<std::pair<double, double>> atoms)
{
    std::vector<Atom> v;
    for (const auto& [y, mass] : atoms)
        v.push_back({Vec::Constant(1, y), mass});
    return atomic(std::move(v));
}

JumpMeasure JumpMeasure::density(DensityLattice lat)
{
    const int n = static_cast<int>(lat.lo.size());
    if (n < 1 || lat.hi.size() != n || static_cast<int>(lat.cells.size()) != n)
        throw StructuralError("density lattice: lo/hi/cells dimension mismatch");
    JumpMeasure m;
    m.kind_ = MeasureKind::DensityGrid;
    m.dim_ = n;
    std::size_t total = 1;
    Vec width(n);
    for (int d = 0; d < n; ++d) {
        if (lat.cells[d] < 1)
            throw StructuralError("density lattice: cells must be >= 1 on every axis");
        if (!(lat.lo[d] < lat.hi[d]))
            throw StructuralError("density lattice: lo < hi required on every axis");
        total *= static_cast<std::size_t>(lat.cells[d]);
        width[d] = (lat.hi[d] - lat.lo[d]) / lat.cells[d];
    }
    if (lat.values.size() != total)
        throw StructuralError("density lattice: values size does not match cell count");
    if (!std::isfinite(lat.excluded_radius) || lat.excluded_radius < 0.0)
        m.defect_ = "excluded_radius must be finite and >= 0";

    if (lat.small_jump_cov.size() == 0) {
        m.small_cov_ = Mat::Zero(n, n);
    } else {
        if (lat.small_jump_cov.rows() != n || lat.small_jump_cov.cols() != n)
            throw StructuralError("density lattice: small_jump_cov must be n x n");
        m.small_cov_ = lat.small_jump_cov;
        m.has_small_cov_ = true;
    }

    const double volume = width.prod();
    std::vector<int> idx(n, 0);
    for (std::size_t c = 0; c < total; ++c) {
        std::size_t rem = c;
        Vec mid(n);
        for (int d = 0; d < n; ++d) {
            idx[d] = static_cast<int>(rem % lat.cells[d]);
            rem /= lat.cells[d];
            mid[d] = lat.lo[d] + (idx[d] + 0.5) * width[d];
        }
        const double v = lat.values[c];
        if (m.defect_.empty() && (!std::isfinite(v) || v < 0.0)) {
            std::ostringstream os;
            os << "values[" << c << "]: density must be finite and >= 0";
            m.defect_ = os.str();
        }
        const double r = mid.norm();
        if (r == 0.0 && lat.excluded_radius == 0.0 && v > 0.0 && m.defect_.empty())
            m.defect_ = "density cell midpoint at the origin with no excluded ball";
        if (r <= lat.excluded_radius || v == 0.0)
            continue;
        m.nodes_.push_back({mid, v * volume});
        m.node_cell_.push_back(static_cast<int>(c));
    }
    m.lattice_ = std::move(lat);
    m.finalize();
    return m;
}

JumpMeasure JumpMeasure::density_from(const std::function<double(const Vec&)>& density, const Vec& lo,
                                      const Vec& hi, std::vector<int> cells, double excluded_radius,
                                      Mat small_jump_cov)
{
    const int n = static_cast<int>(lo.size());
    if (static_cast<int>(cells.size()) != n || hi.size() != n)
        throw StructuralError("density lattice: lo/hi/cells dimension mismatch");
    std::size_t total = 1;
    for (int c : cells)
        total *= static_cast<std::size_t>(std::max(c, 1));
    DensityLattice lat{lo, hi, cells, {}, excluded_radius, std::move(small_jump_cov)};
    lat.values.resize(total);
    Vec mid(n);
    for (std::size_t c = 0; c < total; ++c) {
        std::size_t rem = c;
        for (int d = 0; d < n; ++d) {
            const int i = static_cast<int>(rem % cells[d]);
            rem /= cells[d];
            mid[d] = lo[d] + (i + 0.5) * (hi[d] - lo[d]) / cells[d];
        }
        lat.values[c] = excluded_radius > 0.0 && mid.norm() <= excluded_radius ? 0.0 : density(mid);
    }
    return JumpMeasure::density(std::move(lat));
}

JumpMeasure JumpMeasure::jump_to_origin(const Vec& from, double rate)
{
    if (from.squaredNorm() == 0.0 || rate == 0.0)
        return zero(static_cast<int>(from.size()));
    return atomic({Atom{-from, rate}});
}

void JumpMeasure::finalize()
{
    mean_ = Vec::Zero(dim_);
    mass_ = 0.0;
    cumulative_.clear();
    cumulative_.reserve(nodes_.size());
    for (const auto& a : nodes_) {
        mass_ += a.mass;
        mean_ += a.mass * a.location;
        cumulative_.push_back(mass_);
    }
}

void JumpMeasure::require_well_formed() const
{
    if (!well_formed())
        throw StructuralError(defect_);
}

JumpMeasure JumpMeasure::scaled(double c) const
{
    if (!(c >= 0.0) || !std::isfinite(c))
        throw StructuralError("scale factor must be finite and >= 0");
    JumpMeasure m = *this;
    for (auto& a : m.nodes_)
        a.mass *= c;
    if (m.lattice_)
        for (auto& v : m.lattice_->values)
            v *= c;
    m.small_cov_ *= c;
    if (m.lattice_ && m.has_small_cov_)
        m.lattice_->small_jump_cov = m.small_cov_;
    m.finalize();
    return m;
}

Action Action::scalar(double sigma, JumpMeasure nu, double mu)
{
    return {Mat::Constant(1, 1, sigma), std::move(nu), Vec::Constant(1, mu)};
}

double moment_functional(const JumpMeasure& nu, double p)
{
    nu.require_well_formed();
    double sum = 0.0;
    for (const auto& a : nu.nodes()) {
        const double r2 = a.location.squaredNorm();
        sum += a.mass * std::max(r2, std::pow(r2, 0.5 * p));
    }
    sum += nu.small_jump_cov().trace();
    if (!std::isfinite(sum))
        throw DivergenceError("moment functional diverged");
    return sum;
}

bool validate_mp(const JumpMeasure& nu, double p)
{
    if (!(p >= 2.0))
        throw Error("moment order p must be >= 2");
    nu.require_well_formed();
    try {
        return std::isfinite(moment_functional(nu, p));
    } catch (const DivergenceError&) {
        return false;
    }
}

Mat second_moment_matrix(const JumpMeasure& nu)
{
    nu.require_well_formed();
    Mat m = nu.small_jump_cov();
    for (const auto& a : nu.nodes())
        m.noalias() += a.mass * a.location * a.location.transpose();
    if (!m.allFinite())
        throw DivergenceError("second moment matrix diverged");
    return 0.5 * (m + m.transpose());
}

MassReport total_mass(const JumpMeasure& nu)
{
    MassReport r{nu.node_mass(), false};
    if (const auto* lat = nu.lattice(); lat && lat->excluded_radius == 0.0) {
        bool contains_origin = true;
        for (int d = 0; d < nu.dim(); ++d)
            contains_origin = contains_origin && lat->lo[d] <= 0.0 && lat->hi[d] >= 0.0;
        r.unbounded_warning = contains_origin;
    }
    return r;
}

double big_jump_moment(const JumpMeasure& nu, double q)
{
    double sum = 0.0;
    for (const auto& a : nu.nodes()) {
        const double r2 = a.location.squaredNorm();
        if (r2 > 1.0)
            sum += a.mass * std::pow(r2, 0.5 * q);
    }
    return sum;
}

Vec big_jump_mean(const JumpMeasure& nu)
{
    Vec m = Vec::Zero(nu.dim());
    for (const auto& a : nu.nodes())
        if (a.location.squaredNorm() > 1.0)
            m += a.mass * a.location;
    return m;
}

Vec sample_jump(const JumpMeasure& nu, Rng& rng)
{
    nu.require_well_formed();
    const double mass = nu.node_mass();
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw UnsupportedMeasureError("cannot sample a measure with zero or infinite total mass");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double target = unif(rng) * mass;
    auto it = std::upper_bound(nu.cumulative_.begin(), nu.cumulative_.end(), target);
    std::size_t k = static_cast<std::size_t>(it - nu.cumulative_.begin());
    if (k >= nu.nodes_.size())
        k = nu.nodes_.size() - 1;
    while (nu.nodes_[k].mass == 0.0 && k > 0)
        --k;
    Vec y = nu.nodes_[k].location;
    if (const auto* lat = nu.lattice()) {
        for (int d = 0; d < nu.dim(); ++d) {
            const double w = (lat->hi[d] - lat->lo[d]) / lat->cells[d];
            y[d] += (unif(rng) - 0.5) * w;
        }
        if (y.norm() <= lat->excluded_radius)
            y = nu.nodes_[k].location;
    }
    return y;
}

}  // namespace jumpctl
