#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace jumpctl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Caller-owned random state. Every stochastic routine takes one explicitly.
using Rng = std::mt19937_64;

/// Selects the OpenMP kernel or the serial reference loop. Both produce
/// bit-identical results; the serial path exists for testing and benchmarks.
enum class Execution { Serial, Parallel };

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed measure support (atom at the origin, bad lattice, ...).
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Non-finite accumulation in a moment integral or quadrature.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Measure cannot be sampled (zero or infinite total mass).
class UnsupportedMeasureError : public Error {
public:
    using Error::Error;
};

/// Evaluation outside the declared domain of an analytic field.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Field growth exceeds what the jump measure's moments can integrate.
class GrowthError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, double condition_estimate)
        : Error(what), condition_estimate_(condition_estimate) {}
    double condition_estimate() const { return condition_estimate_; }

private:
    double condition_estimate_;
};

/// Policy left its declared growth class at runtime.
class AdmissibilityError : public Error {
public:
    using Error::Error;
};

/// Riccati equation has no symmetric positive definite solution.
class SolvabilityError : public Error {
public:
    using Error::Error;
};

class BracketError : public Error {
public:
    using Error::Error;
};

/// Exponential tail modes leaked into an ODE solution.
class BoundaryError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& message)
        : Error(field + ": " + message), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// SplitMix64 finaliser, used to derive independent per-path seeds.
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline Rng stream_rng(std::uint64_t seed, std::uint64_t stream)
{
    return Rng(splitmix64(seed ^ splitmix64(stream + 1)));
}

}  // namespace jumpctl
