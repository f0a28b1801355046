#include "jumpctl/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace jumpctl {

namespace {

std::string idx(const std::string& at, std::size_t i) { return at + "[" + std::to_string(i) + "]"; }
std::string key(const std::string& at, const std::string& k) { return at.empty() ? k : at + "." + k; }

const Json* find(const Json& j, const std::string& k)
{
    if (!j.is_object())
        return nullptr;
    auto it = j.find(k);
    return it == j.end() ? nullptr : &*it;
}

double number_or(const Json& j, const std::string& k, double dflt, const std::string& at)
{
    const Json* v = find(j, k);
    return v ? parse_number(*v, key(at, k)) : dflt;
}

int int_or(const Json& j, const std::string& k, int dflt, const std::string& at)
{
    const Json* v = find(j, k);
    if (!v)
        return dflt;
    if (!v->is_number_integer())
        throw ConfigError(key(at, k), "expected an integer");
    return v->get<int>();
}

bool bool_or(const Json& j, const std::string& k, bool dflt, const std::string& at)
{
    const Json* v = find(j, k);
    if (!v)
        return dflt;
    if (!v->is_boolean())
        throw ConfigError(key(at, k), "expected true or false");
    return v->get<bool>();
}

std::string string_of(const Json& j, const std::string& at)
{
    if (!j.is_string())
        throw ConfigError(at, "expected a string");
    return j.get<std::string>();
}

void require_object(const Json& j, const std::string& at)
{
    if (!j.is_object())
        throw ConfigError(at.empty() ? "<root>" : at, "expected an object");
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte)
{
    int line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

double measure_mass(const JumpMeasure& m) { return m.node_mass(); }

}  // namespace

std::uint64_t fnv1a(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

RunConfig config_from_string(const std::string& text, const std::string& source)
{
    RunConfig c;
    c.source = source;
    try {
        c.root = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col), "JSON syntax error");
    }
    require_object(c.root, "");
    c.hash = fnv1a(c.root.dump());
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(path, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_string(ss.str(), path);
}

const Json& require(const Json& j, const std::string& k, const std::string& at)
{
    require_object(j, at);
    const Json* v = find(j, k);
    if (!v)
        throw ConfigError(key(at, k), "missing required field");
    return *v;
}

double parse_number(const Json& j, const std::string& at)
{
    if (!j.is_number())
        throw ConfigError(at, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        throw ConfigError(at, "expected a finite number");
    return v;
}

Vec parse_vector(const Json& j, int n, const std::string& at)
{
    if (n == 1 && j.is_number())
        return Vec::Constant(1, parse_number(j, at));
    if (!j.is_array())
        throw ConfigError(at, "expected an array of numbers");
    if (n >= 0 && static_cast<int>(j.size()) != n)
        throw ConfigError(at, "expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = parse_number(j[i], idx(at, i));
    return v;
}

Mat parse_matrix(const Json& j, int rows, int cols, const std::string& at)
{
    if (rows == 1 && cols == 1 && j.is_number())
        return Mat::Constant(1, 1, parse_number(j, at));
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw ConfigError(at, "expected " + std::to_string(rows) + " rows (row-major array of arrays)");
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const Vec row = parse_vector(j[r], cols, idx(at, r));
        m.row(r) = row.transpose();
    }
    return m;
}

JumpMeasure parse_measure(const Json& j, int dim, const std::string& at)
{
    require_object(j, at);
    const std::string kind = string_of(require(j, "kind", at), key(at, "kind"));
    JumpMeasure m;
    if (kind == "zero") {
        m = JumpMeasure::zero(dim);
    } else if (kind == "atomic") {
        const Json& atoms = require(j, "atoms", at);
        const std::string aat = key(at, "atoms");
        if (!atoms.is_array())
            throw ConfigError(aat, "expected an array of [location, mass] pairs");
        std::vector<Atom> list;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const Json& a = atoms[i];
            Vec y;
            double w;
            if (a.is_array() && a.size() == 2) {
                y = parse_vector(a[0], dim, idx(aat, i) + "[0]");
                w = parse_number(a[1], idx(aat, i) + "[1]");
            } else if (a.is_object()) {
                y = parse_vector(require(a, "y", idx(aat, i)), dim, key(idx(aat, i), "y"));
                w = parse_number(require(a, "mass", idx(aat, i)), key(idx(aat, i), "mass"));
            } else {
                throw ConfigError(idx(aat, i), "expected [location, mass]");
            }
            if (y.norm() == 0.0)
                throw ConfigError(idx(aat, i), "atom at the origin: jump measures live on R^n \\ {0}");
            if (w < 0.0)
                throw ConfigError(idx(aat, i), "negative mass");
            list.push_back({y, w});
        }
        if (list.empty())
            m = JumpMeasure::zero(dim);
        else
            m = JumpMeasure::atomic(std::move(list));
    } else if (kind == "density") {
        DensityLattice lat;
        lat.lo = parse_vector(require(j, "lo", at), dim, key(at, "lo"));
        lat.hi = parse_vector(require(j, "hi", at), dim, key(at, "hi"));
        const Json& cells = require(j, "cells", at);
        if (!cells.is_array() || static_cast<int>(cells.size()) != dim)
            throw ConfigError(key(at, "cells"), "expected one cell count per axis");
        std::size_t total = 1;
        for (std::size_t d = 0; d < cells.size(); ++d) {
            if (!cells[d].is_number_integer() || cells[d].get<int>() < 1)
                throw ConfigError(idx(key(at, "cells"), d), "expected a positive integer");
            lat.cells.push_back(cells[d].get<int>());
            total *= static_cast<std::size_t>(lat.cells.back());
        }
        const Vec vals = parse_vector(require(j, "values", at), static_cast<int>(total), key(at, "values"));
        lat.values.assign(vals.data(), vals.data() + vals.size());
        lat.excluded_radius = number_or(j, "excluded_radius", 0.0, at);
        if (const Json* c = find(j, "small_jump_cov"))
            lat.small_jump_cov = parse_matrix(*c, dim, dim, key(at, "small_jump_cov"));
        m = JumpMeasure::density(std::move(lat));
    } else {
        throw ConfigError(key(at, "kind"), "unknown measure kind '" + kind + "' (zero, atomic, density)");
    }
    if (!m.well_formed())
        throw ConfigError(at, m.defect());
    return m;
}

Grid parse_grid(const Json& j, const std::string& at)
{
    const Json& axes = j.is_object() ? require(j, "axes", at) : j;
    const std::string aat = j.is_object() ? key(at, "axes") : at;
    if (!axes.is_array() || axes.empty() || axes.size() > 2)
        throw ConfigError(aat, "expected one or two axes");
    std::vector<Axis> list;
    for (std::size_t d = 0; d < axes.size(); ++d) {
        const std::string a = idx(aat, d);
        Axis ax;
        ax.lo = parse_number(require(axes[d], "lo", a), key(a, "lo"));
        ax.hi = parse_number(require(axes[d], "hi", a), key(a, "hi"));
        ax.n = int_or(axes[d], "n", 0, a);
        if (!(ax.lo < ax.hi))
            throw ConfigError(a, "needs lo < hi");
        if (ax.n < 16)
            throw ConfigError(key(a, "n"), "needs at least 16 nodes");
        list.push_back(ax);
    }
    return Grid(list);
}

Poly parse_poly(const Json& j, const std::string& at)
{
    const Json& c = j.is_object() ? require(j, "coeffs", at) : j;
    const Vec v = parse_vector(c, -1, j.is_object() ? key(at, "coeffs") : at);
    return Poly(std::vector<double>(v.data(), v.data() + v.size()));
}

DriftLattice parse_lattice(const Json& j, int dim, const std::string& at)
{
    DriftLattice lat;
    lat.lo = parse_vector(require(j, "lo", at), dim, key(at, "lo"));
    lat.hi = parse_vector(require(j, "hi", at), dim, key(at, "hi"));
    const Json& pts = require(j, "points", at);
    if (dim == 1 && pts.is_number_integer()) {
        lat.points = {pts.get<int>()};
    } else {
        if (!pts.is_array() || static_cast<int>(pts.size()) != dim)
            throw ConfigError(key(at, "points"), "expected one point count per axis");
        for (const auto& p : pts)
            lat.points.push_back(p.get<int>());
    }
    for (int d = 0; d < dim; ++d) {
        if (lat.points[d] < 1)
            throw ConfigError(key(at, "points"), "point counts must be >= 1");
        if (lat.hi[d] < lat.lo[d])
            throw ConfigError(at, "needs lo <= hi");
    }
    return lat;
}

LQSpec parse_lq(const Json& j, const std::string& at)
{
    require_object(j, at);
    LQSpec s;
    const Json& L = require(j, "Lambda", at);
    const int n = L.is_number() ? 1 : static_cast<int>(L.size());
    if (n < 1)
        throw ConfigError(key(at, "Lambda"), "empty matrix");
    s.Lambda = parse_matrix(L, n, n, key(at, "Lambda"));
    s.Theta = parse_matrix(require(j, "Theta", at), n, n, key(at, "Theta"));
    s.q = parse_number(require(j, "q", at), key(at, "q"));
    s.u = find(j, "u") ? parse_vector(j["u"], n, key(at, "u")) : Vec::Zero(n);
    if (const Json* c = find(j, "candidates")) {
        if (!c->is_array() || c->empty())
            throw ConfigError(key(at, "candidates"), "expected a non-empty array");
        for (std::size_t i = 0; i < c->size(); ++i) {
            const std::string ca = idx(key(at, "candidates"), i);
            const Json& e = (*c)[i];
            DispersionCandidate d;
            d.name = find(e, "name") ? string_of(e["name"], key(ca, "name")) : "candidate" + std::to_string(i);
            d.sigma = find(e, "sigma") ? parse_matrix(e["sigma"], n, n, key(ca, "sigma")) : Mat::Zero(n, n);
            d.nu = find(e, "measure") ? parse_measure(e["measure"], n, key(ca, "measure")) : JumpMeasure::zero(n);
            s.candidates.push_back(std::move(d));
        }
    } else {
        s.candidates.push_back({"identity", Mat::Identity(n, n), JumpMeasure::zero(n)});
    }
    try {
        s.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(at, e.what());
    }
    return s;
}

Grid parse_problem_grid(const Json& root) { return parse_grid(require(root, "grid", ""), "grid"); }

HJBProblem parse_problem(const Json& root)
{
    if (const Json* lq = find(root, "lq")) {
        const LQSpec spec = parse_lq(*lq, "lq");
        return lq_problem(spec, parse_lattice(require(root, "drift_lattice", ""), spec.dim(), "drift_lattice"));
    }
    const std::string at = "problem";
    const Json& j = require(root, "problem", "");
    require_object(j, at);
    HJBProblem prob;
    prob.dim = int_or(j, "dim", 1, at);
    if (prob.dim < 1 || prob.dim > 2)
        throw ConfigError(key(at, "dim"), "grid problems are 1-D or 2-D");
    const int n = prob.dim;
    const double q = parse_number(require(j, "q", at), key(at, "q"));
    if (!(q > 0.0))
        throw ConfigError(key(at, "q"), "discount must be positive");
    prob.q = [q](const Vec&, const Action&) { return q; };
    prob.q_lower = prob.q_upper = q;
    prob.u = find(j, "u") ? parse_vector(j["u"], n, key(at, "u")) : Vec::Zero(n);
    prob.p = number_or(j, "p", 2.0, at);
    if (prob.p < 2.0)
        throw ConfigError(key(at, "p"), "moment order must be >= 2");
    prob.q_growth = int_or(j, "q_growth", 2, at);

    // running cost: state part + mu^T Theta mu + kappa nu(R^n)
    const std::string cat = key(at, "cost");
    const Json& cost = require(j, "cost", at);
    require_object(cost, cat);
    std::function<double(const Vec&)> state = [](const Vec&) { return 0.0; };
    if (const Json* s = find(cost, "state")) {
        const std::string sat = key(cat, "state");
        const std::string kind = string_of(require(*s, "kind", sat), key(sat, "kind"));
        if (kind == "zero") {
        } else if (kind == "polynomial") {
            if (n != 1)
                throw ConfigError(sat, "polynomial state cost is 1-D only");
            const Poly f = parse_poly(*s, sat);
            state = [f](const Vec& x) { return f(x[0]); };
        } else if (kind == "quadratic") {
            const Mat M = parse_matrix(require(*s, "matrix", sat), n, n, key(sat, "matrix"));
            state = [M](const Vec& x) { return x.dot(M * x); };
        } else {
            throw ConfigError(key(sat, "kind"), "unknown state cost '" + kind + "' (zero, polynomial, quadratic)");
        }
    }
    const Mat theta = find(cost, "drift_weight") ? parse_matrix(cost["drift_weight"], n, n, key(cat, "drift_weight"))
                                                 : Mat::Zero(n, n);
    const double kappa = number_or(cost, "jump_rate_cost", 0.0, cat);
    prob.f = [state, theta, kappa](const Vec& x, const Action& a) {
        return state(x) + a.mu.dot(theta * a.mu) + kappa * a.nu.node_mass();
    };

    const Json& acts = require(j, "actions", at);
    const std::string aat = key(at, "actions");
    if (!acts.is_array() || acts.empty())
        throw ConfigError(aat, "expected a non-empty array");
    for (std::size_t i = 0; i < acts.size(); ++i) {
        const std::string a = idx(aat, i);
        const Json& e = acts[i];
        require_object(e, a);
        const std::string name = find(e, "name") ? string_of(e["name"], key(a, "name")) : "action" + std::to_string(i);
        const Mat sigma = find(e, "sigma") ? parse_matrix(e["sigma"], n, n, key(a, "sigma")) : Mat::Zero(n, n);
        const JumpMeasure nu = find(e, "measure") ? parse_measure(e["measure"], n, key(a, "measure")) : JumpMeasure::zero(n);
        if (!validate_mp(nu, prob.p))
            throw ConfigError(key(a, "measure"), "measure is not in M_p");
        const Vec mu = find(e, "mu") ? parse_vector(e["mu"], n, key(a, "mu")) : Vec::Zero(n);
        const std::string dm = find(e, "drift") ? string_of(e["drift"], key(a, "drift")) : "fixed";
        DriftMode mode;
        if (dm == "fixed")
            mode = DriftMode::Fixed;
        else if (dm == "compensate")
            mode = DriftMode::Compensate;
        else if (dm == "lattice")
            mode = DriftMode::Lattice;
        else
            throw ConfigError(key(a, "drift"), "unknown drift mode '" + dm + "' (fixed, compensate, lattice)");
        if (const Json* r = find(e, "jump_to_origin")) {
            const double rate = parse_number(*r, key(a, "jump_to_origin"));
            if (!(rate > 0.0))
                throw ConfigError(key(a, "jump_to_origin"), "rate must be positive");
            prob.actions.push_back(ActionFamily{
                name, [sigma, rate](const Vec& x) { return Action{sigma, JumpMeasure::jump_to_origin(x, rate), Vec::Zero(x.size())}; },
                mode});
        } else {
            prob.actions.push_back(ActionFamily::constant(name, Action{sigma, nu, mu}, mode));
        }
    }
    if (const Json* lat = find(root, "drift_lattice"))
        prob.drift_lattice = parse_lattice(*lat, n, "drift_lattice");
    try {
        prob.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(at, e.what());
    }
    return prob;
}

SolveOptions parse_solver(const Json& root)
{
    SolveOptions o;
    const Json* j = find(root, "solver");
    if (!j)
        return o;
    const std::string at = "solver";
    require_object(*j, at);
    o.tol = number_or(*j, "tol", o.tol, at);
    o.max_iters = int_or(*j, "max_iters", o.max_iters, at);
    o.small_jump_split = number_or(*j, "small_jump_split", o.small_jump_split, at);
    o.refine_drift = bool_or(*j, "refine_drift", o.refine_drift, at);
    o.interior_fraction = number_or(*j, "interior_fraction", o.interior_fraction, at);
    if (!(o.tol > 0.0))
        throw ConfigError(key(at, "tol"), "must be positive");
    if (o.max_iters < 1)
        throw ConfigError(key(at, "max_iters"), "must be >= 1");
    return o;
}

FiniteHorizonOptions parse_finite_horizon(const Json& root)
{
    const std::string at = "finite_horizon";
    const Json& j = require(root, at, "");
    require_object(j, at);
    FiniteHorizonOptions o;
    o.T = parse_number(require(j, "T", at), key(at, "T"));
    o.n_steps = int_or(j, "n_steps", o.n_steps, at);
    o.exponential_fitting = bool_or(j, "exponential_fitting", o.exponential_fitting, at);
    if (!(o.T > 0.0))
        throw ConfigError(key(at, "T"), "must be positive");
    if (o.n_steps < 1)
        throw ConfigError(key(at, "n_steps"), "must be >= 1");
    return o;
}

ScalarField parse_terminal(const Json& root, int dim)
{
    const Json* fh = find(root, "finite_horizon");
    const Json* t = fh ? find(*fh, "terminal") : nullptr;
    if (!t)
        return ScalarField::analytic(
            dim, [](const Vec&) { return 0.0; }, [dim](const Vec&) -> Vec { return Vec::Zero(dim); },
            [dim](const Vec&) -> Mat { return Mat::Zero(dim, dim); }, 0);
    return parse_phi(*t, root, "finite_horizon.terminal");
}

SimConfig parse_simulation(const Json& j, int dim, const std::string& at)
{
    require_object(j, at);
    SimConfig c;
    c.x0 = parse_vector(require(j, "x0", at), dim, key(at, "x0"));
    c.T = number_or(j, "T", c.T, at);
    c.dt = number_or(j, "dt", c.dt, at);
    c.n_paths = int_or(j, "n_paths", c.n_paths, at);
    if (const Json* s = find(j, "seed")) {
        if (!s->is_number_unsigned())
            throw ConfigError(key(at, "seed"), "expected a non-negative integer");
        c.seed = s->get<std::uint64_t>();
    }
    c.lambda_max = number_or(j, "lambda_max", 0.0, at);
    c.record_every = int_or(j, "record_every", c.record_every, at);
    c.record_characteristics = bool_or(j, "characteristics", false, at);
    c.p = number_or(j, "p", c.p, at);
    if (const Json* u = find(j, "u"))
        c.u = parse_vector(*u, dim, key(at, "u"));
    if (const Json* m = find(j, "moment_orders")) {
        const Vec v = parse_vector(*m, -1, key(at, "moment_orders"));
        c.moment_orders.assign(v.data(), v.data() + v.size());
    }
    if (const Json* e = find(j, "jump_bin_edges")) {
        const Vec v = parse_vector(*e, -1, key(at, "jump_bin_edges"));
        c.jump_bin_edges.assign(v.data(), v.data() + v.size());
        if (!std::is_sorted(c.jump_bin_edges.begin(), c.jump_bin_edges.end()))
            throw ConfigError(key(at, "jump_bin_edges"), "must be increasing");
    }
    if (const Json* v = find(j, "on_violation")) {
        const std::string s = string_of(*v, key(at, "on_violation"));
        if (s == "throw")
            c.on_violation = ViolationPolicy::Throw;
        else if (s == "record")
            c.on_violation = ViolationPolicy::Record;
        else
            throw ConfigError(key(at, "on_violation"), "expected 'throw' or 'record'");
    }
    if (!(c.T > 0.0))
        throw ConfigError(key(at, "T"), "must be positive");
    if (!(c.dt > 0.0))
        throw ConfigError(key(at, "dt"), "must be positive");
    if (c.n_paths < 1)
        throw ConfigError(key(at, "n_paths"), "must be >= 1");
    if (c.record_every < 1)
        throw ConfigError(key(at, "record_every"), "must be >= 1");
    return c;
}

PolicyChoice parse_policy(const Json& j, const Json& root, const std::string& at)
{
    require_object(j, at);
    const std::string kind = string_of(require(j, "kind", at), key(at, "kind"));
    PolicyChoice out{PolicyField::constant(Action::scalar(0.0, JumpMeasure::zero(1), 0.0)), 0.0};
    if (kind == "lq_optimal") {
        const LQSolution sol = solve_lq(parse_lq(require(root, "lq", ""), "lq"));
        const double eps = number_or(j, "eps", 0.0, at);
        out.policy = sol.policy(eps);
        if (bool_or(j, "certify", false, at))
            out.policy = out.policy.with_certificate({sol.growth_constant() * (1.0 + eps) * (1.0 + eps), 2.0});
        out.lambda_hint = measure_mass(sol.nu_hat);
    } else if (kind == "example1") {
        out.policy = example1_policy();
        out.lambda_hint = 1.0;
    } else if (kind == "constant" || kind == "affine") {
        const Json& d = require(j, "dim", at);
        if (!d.is_number_integer() || d.get<int>() < 1)
            throw ConfigError(key(at, "dim"), "expected a positive integer");
        const int n = d.get<int>();
        Action a;
        a.sigma = find(j, "sigma") ? parse_matrix(j["sigma"], n, n, key(at, "sigma")) : Mat::Zero(n, n);
        a.nu = find(j, "measure") ? parse_measure(j["measure"], n, key(at, "measure")) : JumpMeasure::zero(n);
        a.mu = find(j, "mu") ? parse_vector(j["mu"], n, key(at, "mu")) : Vec::Zero(n);
        out.lambda_hint = measure_mass(a.nu);
        if (kind == "constant") {
            out.policy = PolicyField::constant(a, find(j, "name") ? string_of(j["name"], key(at, "name")) : "constant");
        } else {
            const Mat gain = parse_matrix(require(j, "gain", at), n, n, key(at, "gain"));
            const Vec offset = find(j, "offset") ? parse_vector(j["offset"], n, key(at, "offset")) : Vec::Zero(n);
            out.policy = PolicyField::affine_drift(a, gain, offset, "affine");
        }
    } else {
        throw ConfigError(key(at, "kind"), "unknown policy kind '" + kind + "' (constant, affine, lq_optimal, example1)");
    }
    if (const Json* c = find(j, "certificate")) {
        const std::string cat = key(at, "certificate");
        out.policy = out.policy.with_certificate(
            {parse_number(require(*c, "K", cat), key(cat, "K")), parse_number(require(*c, "p", cat), key(cat, "p"))});
    }
    return out;
}

ScalarField parse_phi(const Json& j, const Json& root, const std::string& at)
{
    require_object(j, at);
    const std::string kind = string_of(require(j, "kind", at), key(at, "kind"));
    if (kind == "lq_value")
        return solve_lq(parse_lq(require(root, "lq", ""), "lq")).value_field();
    if (kind == "constant") {
        const double c = parse_number(require(j, "value", at), key(at, "value"));
        const int n = int_or(j, "dim", 1, at);
        return ScalarField::analytic(
            n, [c](const Vec&) { return c; }, [n](const Vec&) -> Vec { return Vec::Zero(n); },
            [n](const Vec&) -> Mat { return Mat::Zero(n, n); }, 0);
    }
    if (kind == "poly_exp" || kind == "polynomial") {
        const Poly p = find(j, "coeffs") ? parse_poly(j["coeffs"], key(at, "coeffs")) : Poly::constant(0.0);
        const double c = number_or(j, "exp_coeff", 0.0, at);
        const double r = number_or(j, "exp_rate", 0.0, at);
        const Poly d1 = p.derivative(), d2 = d1.derivative();
        const int growth = c != 0.0 && r != 0.0 ? -1 : p.degree();
        return ScalarField::analytic(
            1, [p, c, r](const Vec& x) { return p(x[0]) + c * std::exp(r * x[0]); },
            [d1, c, r](const Vec& x) -> Vec { return Vec::Constant(1, d1(x[0]) + c * r * std::exp(r * x[0])); },
            [d2, c, r](const Vec& x) -> Mat { return Mat::Constant(1, 1, d2(x[0]) + c * r * r * std::exp(r * x[0])); },
            growth);
    }
    throw ConfigError(key(at, "kind"), "unknown field kind '" + kind + "' (lq_value, constant, polynomial, poly_exp)");
}

}  // namespace jumpctl
