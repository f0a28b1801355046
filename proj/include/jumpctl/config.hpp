#pragma once

#include "jumpctl/dynamics.hpp"
#include "jumpctl/examples.hpp"
#include "jumpctl/hjb.hpp"
#include "jumpctl/lq.hpp"
#include "jumpctl/polynomial.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace jumpctl {

using Json = nlohmann::json;

/// A parsed configuration file. `hash` is FNV-1a over the canonical dump,
/// so formatting changes do not alter it.
struct RunConfig {
    Json root;
    std::string source;
    std::uint64_t hash = 0;
};

/// Reads and parses a JSON file; syntax errors become ConfigError with the
/// line and column.
RunConfig load_config(const std::string& path);
RunConfig config_from_string(const std::string& text, const std::string& source = "<string>");

std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

// Field parsers. `at` is the JSON path used in error messages, e.g. "problem.actions[1].measure".
double parse_number(const Json& j, const std::string& at);
Vec parse_vector(const Json& j, int n, const std::string& at);
Mat parse_matrix(const Json& j, int rows, int cols, const std::string& at);
JumpMeasure parse_measure(const Json& j, int dim, const std::string& at);
Grid parse_grid(const Json& j, const std::string& at);
Poly parse_poly(const Json& j, const std::string& at);
DriftLattice parse_lattice(const Json& j, int dim, const std::string& at);
LQSpec parse_lq(const Json& j, const std::string& at);

/// The control problem of a config: either an "lq" section (posed for the grid
/// solver over root "drift_lattice") or a general "problem" section.
HJBProblem parse_problem(const Json& root);
Grid parse_problem_grid(const Json& root);
SolveOptions parse_solver(const Json& root);
FiniteHorizonOptions parse_finite_horizon(const Json& root);
/// Terminal data for the finite-horizon solve ("finite_horizon.terminal"), zero by default.
ScalarField parse_terminal(const Json& root, int dim);

SimConfig parse_simulation(const Json& j, int dim, const std::string& at);

struct PolicyChoice {
    PolicyField policy;
    double lambda_hint = 0.0;  // thinning bound implied by the policy's measures
};

/// Policies: constant, affine, lq_optimal (with eps), example1.
PolicyChoice parse_policy(const Json& j, const Json& root, const std::string& at);

/// Phi for verifiers: lq_value, or poly_exp (polynomial plus c exp(r x)).
ScalarField parse_phi(const Json& j, const Json& root, const std::string& at);

/// Looks up `key` in `j` and throws ConfigError naming the path when absent.
const Json& require(const Json& j, const std::string& key, const std::string& at);

}  // namespace jumpctl
