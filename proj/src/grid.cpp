#include "jumpctl/grid.hpp"

#include <algorithm>
#include <cmath>

namespace jumpctl {

namespace {

// Binomial expansion of sum_k c_k ((x - o)/s)^k into powers of x.
Vec to_raw_basis(const Vec& c, double o, double s)
{
    const int m = static_cast<int>(c.size());
    Vec out = Vec::Zero(m);
    for (int k = 0; k < m; ++k) {
        const double ck = c[k] / std::pow(s, k);
        double binom = 1.0;
        for (int j = 0; j <= k; ++j) {
            // term binom(k, j) x^j (-o)^(k-j)
            out[j] += ck * binom * std::pow(-o, k - j);
            binom = binom * (k - j) / (j + 1);
        }
    }
    return out;
}

Mat vandermonde(const std::vector<double>& t, int degree)
{
    Mat a(t.size(), degree + 1);
    for (std::size_t i = 0; i < t.size(); ++i) {
        double v = 1.0;
        for (int k = 0; k <= degree; ++k) {
            a(i, k) = v;
            v *= t[i];
        }
    }
    return a;
}

}  // namespace

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes))
{
    if (axes_.empty() || axes_.size() > 2)
        throw Error("grid dimension must be 1 or 2");
    size_ = 1;
    for (const auto& a : axes_) {
        if (!(a.lo < a.hi))
            throw Error("grid axis needs lo < hi");
        if (a.n < 16)
            throw Error("grid axis needs at least 16 nodes");
        size_ *= a.n;
    }
}

Grid Grid::line(double lo, double hi, int n) { return Grid({Axis{lo, hi, n}}); }

Grid Grid::box(Axis a0, Axis a1) { return Grid({a0, a1}); }

std::array<int, 2> Grid::multi_index(int node) const
{
    if (dim() == 1)
        return {node, 0};
    return {node % axes_[0].n, node / axes_[0].n};
}

int Grid::node_index(const std::array<int, 2>& idx) const
{
    return dim() == 1 ? idx[0] : idx[0] + axes_[0].n * idx[1];
}

Vec Grid::point(int node) const
{
    const auto idx = multi_index(node);
    Vec x(dim());
    for (int d = 0; d < dim(); ++d)
        x[d] = axes_[d].coord(idx[d]);
    return x;
}

double Grid::spacing() const
{
    double h = axes_[0].h();
    for (const auto& a : axes_)
        h = std::max(h, a.h());
    return h;
}

bool Grid::contains(const Vec& x) const
{
    for (int d = 0; d < dim(); ++d)
        if (x[d] < axes_[d].lo || x[d] > axes_[d].hi)
            return false;
    return true;
}

int Grid::boundary_depth(int node) const
{
    const auto idx = multi_index(node);
    int depth = idx[0];
    for (int d = 0; d < dim(); ++d)
        depth = std::min({depth, idx[d], axes_[d].n - 1 - idx[d]});
    return depth;
}

TailExtension::TailExtension(const Grid& grid, int degree, double tail_fraction)
    : degree_(degree)
{
    if (degree < 0)
        throw Error("tail extension degree must be >= 0");
    for (int d = 0; d < grid.dim(); ++d)
        axes_.push_back(grid.axis(d));
    sides_.resize(axes_.size());
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        const Axis& ax = axes_[d];
        const int m = std::min(ax.n, std::max(degree + 2, static_cast<int>(std::ceil(tail_fraction * ax.n))));
        for (int side = 0; side < 2; ++side) {
            Side& s = sides_[d][side];
            s.origin = side == 0 ? ax.lo : ax.hi;
            s.scale = (m - 1) * ax.h();
            std::vector<double> t;
            for (int k = 0; k < m; ++k) {
                const int i = side == 0 ? k : ax.n - 1 - k;
                s.nodes.push_back(i);
                t.push_back((ax.coord(i) - s.origin) / s.scale);
            }
            s.pinv = vandermonde(t, degree).completeOrthogonalDecomposition().pseudoInverse();
        }
    }
}

Stencil TailExtension::axis_weights(int axis, double x) const
{
    const Axis& ax = axes_[axis];
    if (x >= ax.lo && x <= ax.hi) {
        const double s = (x - ax.lo) / ax.h();
        const double nearest = std::round(s);
        if (std::abs(s - nearest) < 1e-9)
            return {{static_cast<int>(nearest), 1.0}};
        int i = std::min(static_cast<int>(std::floor(s)), ax.n - 2);
        i = std::max(i, 0);
        const double w = s - i;
        if (w == 0.0)
            return {{i, 1.0}};
        return {{i, 1.0 - w}, {i + 1, w}};
    }
    const Side& side = sides_[axis][x < ax.lo ? 0 : 1];
    const double t = (x - side.origin) / side.scale;
    Vec basis(degree_ + 1);
    double v = 1.0;
    for (int k = 0; k <= degree_; ++k) {
        basis[k] = v;
        v *= t;
    }
    const Vec w = side.pinv.transpose() * basis;
    Stencil out;
    out.reserve(side.nodes.size());
    for (std::size_t k = 0; k < side.nodes.size(); ++k)
        out.push_back({side.nodes[k], w[static_cast<Eigen::Index>(k)]});
    return out;
}

Stencil TailExtension::stencil(const Vec& x) const
{
    Stencil s0 = axis_weights(0, x[0]);
    if (axes_.size() == 1)
        return s0;
    const Stencil s1 = axis_weights(1, x[1]);
    Stencil out;
    out.reserve(s0.size() * s1.size());
    for (const auto& [j, wj] : s1)
        for (const auto& [i, wi] : s0)
            out.push_back({i + axes_[0].n * j, wi * wj});
    return out;
}

Vec TailExtension::fit_coefficients(int axis, int side, const Vec& line_values) const
{
    const Side& s = sides_[axis][side];
    return to_raw_basis(s.pinv * line_values, s.origin, s.scale);
}

double apply_stencil(const Stencil& s, const Vec& values)
{
    double v = 0.0;
    for (const auto& [i, w] : s)
        v += w * values[i];
    return v;
}

ValueField::ValueField(Grid grid, Vec values, int q_growth)
    : grid_(std::move(grid)), values_(std::move(values)), q_growth_(q_growth), ext_(grid_, q_growth)
{
    if (values_.size() != grid_.size())
        throw Error("value field size does not match grid");
    if (!values_.allFinite())
        throw Error("value field has non-finite entries");
    if (q_growth < 0)
        throw Error("growth degree must be >= 0");
}

double ValueField::operator()(const Vec& x) const { return apply_stencil(ext_.stencil(x), values_); }

namespace {

// Values along grid line `line` of `axis` at the given line indices.
Vec line_values(const Grid& g, const Vec& values, int axis, int line, const std::vector<int>& idx)
{
    Vec v(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        std::array<int, 2> mi{0, 0};
        mi[axis] = idx[k];
        mi[1 - axis] = line;
        v[static_cast<Eigen::Index>(k)] = values[g.node_index(mi)];
    }
    return v;
}

int line_count(const Grid& g, int axis) { return g.dim() == 1 ? 1 : g.axis(1 - axis).n; }

// Relative residual of a degree-d least-squares fit of v on the points t.
double fit_residual(const std::vector<double>& t, const Vec& v, int degree)
{
    const Mat a = vandermonde(t, degree);
    const Vec c = a.colPivHouseholderQr().solve(v);
    const double scale = std::max(v.cwiseAbs().maxCoeff(), 1e-300);
    return (a * c - v).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

std::vector<TailFit> ValueField::tail_fits() const
{
    std::vector<TailFit> fits;
    for (int d = 0; d < grid_.dim(); ++d) {
        for (int side = 0; side < 2; ++side) {
            TailFit f{d, side, {}, 0.0};
            const auto& idx = ext_.fit_nodes(d, side);
            std::vector<double> t;
            for (int i : idx)
                t.push_back(grid_.axis(d).coord(i));
            for (int line = 0; line < line_count(grid_, d); ++line) {
                const Vec v = line_values(grid_, values_, d, line, idx);
                f.coefficients.push_back(ext_.fit_coefficients(d, side, v));
                std::vector<double> tn;
                for (double x : t)
                    tn.push_back((x - t.front()) / (t.back() - t.front()));
                if (static_cast<int>(idx.size()) > q_growth_ + 1)
                    f.residual = std::max(f.residual, fit_residual(tn, v, q_growth_));
            }
            fits.push_back(std::move(f));
        }
    }
    return fits;
}

double ValueField::tail_residual() const
{
    double r = 0.0;
    for (const auto& f : tail_fits())
        r = std::max(r, f.residual);
    return r;
}

int ValueField::effective_tail_degree(double rel_tol) const
{
    const int max_degree = q_growth_ + 2;
    int worst = 0;
    for (int d = 0; d < grid_.dim(); ++d) {
        for (int side = 0; side < 2; ++side) {
            const auto& idx = ext_.fit_nodes(d, side);
            std::vector<double> t;
            for (int i : idx)
                t.push_back((grid_.axis(d).coord(i) - grid_.axis(d).coord(idx.front())) /
                            (grid_.axis(d).coord(idx.back()) - grid_.axis(d).coord(idx.front())));
            for (int line = 0; line < line_count(grid_, d); ++line) {
                const Vec v = line_values(grid_, values_, d, line, idx);
                int deg = max_degree + 1;
                for (int k = 0; k <= max_degree && k + 1 < static_cast<int>(idx.size()); ++k) {
                    if (fit_residual(t, v, k) <= rel_tol) {
                        deg = k;
                        break;
                    }
                }
                worst = std::max(worst, deg);
            }
        }
    }
    return worst;
}

}  // namespace jumpctl
