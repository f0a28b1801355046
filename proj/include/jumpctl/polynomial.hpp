#pragma once

#include "jumpctl/types.hpp"

#include <vector>

namespace jumpctl {

/// Real polynomial in one variable, coefficients in ascending powers.
class Poly {
public:
    Poly() = default;
    explicit Poly(std::vector<double> coeffs);
    static Poly constant(double c) { return Poly({c}); }
    static Poly monomial(int k, double c = 1.0);

    int degree() const;
    const std::vector<double>& coeffs() const { return c_; }
    double coeff(int k) const { return k < static_cast<int>(c_.size()) ? c_[k] : 0.0; }

    double operator()(double x) const;
    Poly derivative() const;
    bool even(double tol = 0.0) const;

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(double s) const;

private:
    void trim();
    std::vector<double> c_;
};

/// The unique polynomial P with a*P - P''/2 = f, i.e. the polynomial-growth
/// particular solution of P''/2 - a*P + f = 0. Requires a > 0.
Poly resolvent_particular(const Poly& f, double a);

}  // namespace jumpctl
