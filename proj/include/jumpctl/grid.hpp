#pragma once

#include "jumpctl/types.hpp"

#include <array>
#include <utility>
#include <vector>

namespace jumpctl {

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    int n = 16;

    double h() const { return (hi - lo) / (n - 1); }
    double coord(int i) const { return lo + i * h(); }
};

/// Uniform tensor grid in one or two dimensions. Node index runs fastest along
/// axis 0.
class Grid {
public:
    explicit Grid(std::vector<Axis> axes);
    static Grid line(double lo, double hi, int n);
    static Grid box(Axis a0, Axis a1);

    int dim() const { return static_cast<int>(axes_.size()); }
    const Axis& axis(int d) const { return axes_[d]; }
    int size() const { return size_; }
    int stride(int d) const { return d == 0 ? 1 : axes_[0].n; }
    std::array<int, 2> multi_index(int node) const;
    int node_index(const std::array<int, 2>& idx) const;
    Vec point(int node) const;
    double spacing() const;
    bool contains(const Vec& x) const;

    /// Distance of a node from the nearest boundary in grid cells (minimum over axes).
    int boundary_depth(int node) const;

private:
    std::vector<Axis> axes_;
    int size_ = 0;
};

/// Sparse linear functional over grid node values.
using Stencil = std::vector<std::pair<int, double>>;

/// Least-squares polynomial extension of a grid function beyond its box,
/// fitted on the outer tail_fraction of nodes at each end of each axis.
/// The fit is linear in the node values, so extrapolation is a stencil.
class TailExtension {
public:
    TailExtension() = default;
    TailExtension(const Grid& grid, int degree, double tail_fraction = 0.1);

    int degree() const { return degree_; }

    /// Weights on the 1-D line indices of `axis` that reproduce the value at
    /// coordinate x: linear interpolation inside, polynomial tail outside.
    Stencil axis_weights(int axis, double x) const;

    /// Full tensor-product stencil for a point.
    Stencil stencil(const Vec& x) const;

    /// Line indices used by the fit at one end of an axis (side 0 = lo, 1 = hi).
    const std::vector<int>& fit_nodes(int axis, int side) const { return sides_[axis][side].nodes; }

    /// Coefficients of the fitted polynomial in the raw coordinate, given the
    /// values on fit_nodes(axis, side).
    Vec fit_coefficients(int axis, int side, const Vec& line_values) const;

private:
    struct Side {
        std::vector<int> nodes;
        double origin = 0.0;
        double scale = 1.0;
        Mat pinv;  // (degree+1) x m
    };
    std::vector<Axis> axes_;
    int degree_ = 2;
    std::vector<std::array<Side, 2>> sides_;
};

struct TailFit {
    int axis = 0;
    int side = 0;
    std::vector<Vec> coefficients;  // one polynomial per grid line along `axis`
    double residual = 0.0;          // max relative least-squares residual
};

/// Grid samples of a value function with polynomial growth metadata.
class ValueField {
public:
    ValueField(Grid grid, Vec values, int q_growth);

    const Grid& grid() const { return grid_; }
    const Vec& values() const { return values_; }
    int q_growth() const { return q_growth_; }
    const TailExtension& extension() const { return ext_; }

    double operator()(const Vec& x) const;
    double at(int node) const { return values_[node]; }

    /// Tail fits at both ends of every axis, with residuals.
    std::vector<TailFit> tail_fits() const;
    double tail_residual() const;

    /// Smallest polynomial degree (searched up to q_growth + 2) whose
    /// least-squares fit on every outer tail region has relative residual
    /// <= rel_tol. Used to certify the declared growth degree.
    int effective_tail_degree(double rel_tol = 1e-6) const;

    bool nonnegative(double tol = 0.0) const { return values_.minCoeff() >= -tol; }

private:
    Grid grid_;
    Vec values_;
    int q_growth_;
    TailExtension ext_;
};

double apply_stencil(const Stencil& s, const Vec& values);

}  // namespace jumpctl
