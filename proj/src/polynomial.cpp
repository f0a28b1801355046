#include "jumpctl/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace jumpctl {

Poly::Poly(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

Poly Poly::monomial(int k, double c)
{
    std::vector<double> v(static_cast<std::size_t>(k) + 1, 0.0);
    v[k] = c;
    return Poly(std::move(v));
}

void Poly::trim()
{
    while (!c_.empty() && c_.back() == 0.0)
        c_.pop_back();
}

int Poly::degree() const { return c_.empty() ? 0 : static_cast<int>(c_.size()) - 1; }

double Poly::operator()(double x) const
{
    double v = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it)
        v = v * x + *it;
    return v;
}

Poly Poly::derivative() const
{
    std::vector<double> d;
    for (std::size_t k = 1; k < c_.size(); ++k)
        d.push_back(static_cast<double>(k) * c_[k]);
    return Poly(std::move(d));
}

bool Poly::even(double tol) const
{
    for (std::size_t k = 1; k < c_.size(); k += 2)
        if (std::abs(c_[k]) > tol)
            return false;
    return true;
}

Poly Poly::operator+(const Poly& o) const
{
    std::vector<double> v(std::max(c_.size(), o.c_.size()), 0.0);
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = coeff(static_cast<int>(k)) + o.coeff(static_cast<int>(k));
    return Poly(std::move(v));
}

Poly Poly::operator-(const Poly& o) const { return *this + o * -1.0; }

Poly Poly::operator*(double s) const
{
    std::vector<double> v = c_;
    for (auto& x : v)
        x *= s;
    return Poly(std::move(v));
}

Poly resolvent_particular(const Poly& f, double a)
{
    if (!(a > 0.0))
        throw Error("resolvent coefficient must be positive");
    // P = (1/a) sum_j (D^2 / (2a))^j f; the series stops after deg/2 terms.
    Poly term = f * (1.0 / a);
    Poly sum = term;
    while (term.degree() >= 2) {
        term = term.derivative().derivative() * (1.0 / (2.0 * a));
        sum = sum + term;
    }
    return sum;
}

}  // namespace jumpctl
