// jumpctl: solve, simulate and verify controlled jump processes from JSON configs.

#include "jumpctl/config.hpp"
#include "jumpctl/examples.hpp"
#include "jumpctl/hjb.hpp"
#include "jumpctl/io.hpp"
#include "jumpctl/lq.hpp"
#include "jumpctl/verify.hpp"

#include <CLI11.hpp>
#include <omp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

using namespace jumpctl;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kInput = 1, kNumerical = 2, kVerification = 3 };

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::optional<double> tol;
    int which = 0;
};

struct Run {
    RunConfig cfg;
    Provenance prov;
    fs::path out;
};

Run open_run(const Options& o, const std::string& command, bool config_required = true)
{
    Run r;
    if (!o.config.empty())
        r.cfg = load_config(o.config);
    else if (config_required)
        throw ConfigError("--config", "a config file is required for '" + command + "'");
    else
        r.cfg = config_from_string("{}", "<defaults>");
    r.prov.config_hash = r.cfg.hash;
    r.prov.command = command;
    r.out = o.out;
    std::error_code ec;
    fs::create_directories(r.out, ec);
    if (ec || !fs::is_directory(r.out))
        throw ConfigError("--out", "cannot create output directory '" + o.out + "'");
    return r;
}

SolveOptions solver_options(const Run& r, const Options& o)
{
    SolveOptions s = parse_solver(r.cfg.root);
    if (o.tol)
        s.tol = *o.tol;
    return s;
}

SimConfig simulation(const Run& r, const Options& o, int dim, double lambda_hint)
{
    SimConfig c = parse_simulation(require(r.cfg.root, "simulation", ""), dim, "simulation");
    if (o.seed)
        c.seed = *o.seed;
    if (c.lambda_max <= 0.0)
        c.lambda_max = lambda_hint;
    // u defaults to the lq section's offset
    if (c.u.size() == 0 && r.cfg.root.contains("lq"))
        c.u = parse_lq(r.cfg.root["lq"], "lq").u;
    return c;
}

std::vector<std::string> coord_names(int dim)
{
    std::vector<std::string> n;
    for (int d = 0; d < dim; ++d)
        n.push_back("x" + std::to_string(d));
    return n;
}

void write_value_policy(const Run& r, const ValueField& v, const PolicyTable& pol, const Json& extra)
{
    const Grid& g = v.grid();
    auto cols = coord_names(g.dim());
    cols.insert(cols.begin(), "node");
    auto vcols = cols;
    vcols.push_back("value");
    CsvWriter vw((r.out / "value.csv").string(), r.prov, vcols, extra);
    auto pcols = cols;
    pcols.push_back("action_id");
    pcols.push_back("lattice_index");
    for (int d = 0; d < g.dim(); ++d)
        pcols.push_back("mu" + std::to_string(d));
    CsvWriter pw((r.out / "policy.csv").string(), r.prov, pcols, extra);
    for (int i = 0; i < g.size(); ++i) {
        const Vec x = g.point(i);
        std::vector<double> row{static_cast<double>(i)};
        for (int d = 0; d < g.dim(); ++d)
            row.push_back(x[d]);
        auto vr = row;
        vr.push_back(v.at(i));
        vw.row(vr);
        row.push_back(pol.family[i]);
        row.push_back(pol.lattice[i]);
        for (int d = 0; d < g.dim(); ++d)
            row.push_back(pol.mu(d, i));
        pw.row(row);
    }
    vw.close();
    pw.close();
}

// Sup-norm comparison with the closed form over the middle third of each axis.
Json lq_comparison(const Json& root, const ValueField& v)
{
    const LQSolution sol = solve_lq(parse_lq(root["lq"], "lq"));
    const Grid& g = v.grid();
    double err = 0.0, scale = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        const Vec x = g.point(i);
        bool inner = true;
        for (int d = 0; d < g.dim(); ++d) {
            const Axis& a = g.axis(d);
            const double third = (a.hi - a.lo) / 3.0;
            inner = inner && x[d] >= a.lo + third - 1e-12 && x[d] <= a.hi - third + 1e-12;
        }
        if (!inner)
            continue;
        err = std::max(err, std::abs(v.at(i) - sol.value(x)));
        scale = std::max(scale, std::abs(sol.value(x)));
    }
    Json j = to_json(sol);
    j["relative_sup_error_middle_third"] = json_number(scale > 0 ? err / scale : err);
    return j;
}

int cmd_solve(const Options& o)
{
    Run r = open_run(o, "solve");
    const HJBProblem prob = parse_problem(r.cfg.root);
    const Grid grid = parse_problem_grid(r.cfg.root);
    const SolveOptions opt = solver_options(r, o);
    spdlog::info("solving stationary HJB on {} nodes with {} action families", grid.size(), prob.actions.size());
    const StationarySolution sol = solve_stationary(prob, grid, opt);
    for (const auto& w : sol.report.warnings)
        spdlog::warn("{}", w);
    write_value_policy(r, sol.value, sol.policy, Json{{"kind", "stationary"}});
    Json rep{{"convergence", to_json(sol.report)}};
    if (r.cfg.root.contains("lq"))
        rep["closed_form"] = lq_comparison(r.cfg.root, sol.value);
    write_json((r.out / "report.json").string(), r.prov, rep);
    spdlog::info("iterations {}, converged {}", sol.report.iterations, sol.report.converged);
    return sol.report.converged ? kOk : kNumerical;
}

int cmd_solve_finite(const Options& o)
{
    Run r = open_run(o, "solve-finite");
    const HJBProblem prob = parse_problem(r.cfg.root);
    const Grid grid = parse_problem_grid(r.cfg.root);
    const SolveOptions opt = solver_options(r, o);
    const FiniteHorizonOptions fh = parse_finite_horizon(r.cfg.root);
    const ScalarField terminal = parse_terminal(r.cfg.root, prob.dim);
    const FiniteHorizonSolution sol = solve_finite_horizon(prob, terminal, grid, fh, opt);
    write_value_policy(r, sol.values.front(), sol.policies.front(), Json{{"kind", "finite_horizon"}, {"t", 0.0}});

    auto cols = coord_names(grid.dim());
    cols.insert(cols.begin(), {"t", "node"});
    cols.push_back("value");
    CsvWriter all((r.out / "values_all.csv").string(), r.prov, cols, Json{{"T", fh.T}, {"n_steps", fh.n_steps}});
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        for (int i = 0; i < grid.size(); ++i) {
            std::vector<double> row{sol.times[k], static_cast<double>(i)};
            const Vec x = grid.point(i);
            for (int d = 0; d < grid.dim(); ++d)
                row.push_back(x[d]);
            row.push_back(sol.values[k].at(i));
            all.row(row);
        }
    }
    all.close();
    Json rep{{"T", fh.T}, {"n_steps", fh.n_steps}, {"exponential_fitting", fh.exponential_fitting}};
    if (r.cfg.root.contains("lq"))
        rep["closed_form_stationary"] = lq_comparison(r.cfg.root, sol.values.front());
    write_json((r.out / "report.json").string(), r.prov, rep);
    return kOk;
}

int cmd_simulate(const Options& o)
{
    Run r = open_run(o, "simulate");
    const Json& sim = require(r.cfg.root, "simulation", "");
    const PolicyChoice pc = parse_policy(require(sim, "policy", "simulation"), r.cfg.root, "simulation.policy");
    SimConfig cfg = simulation(r, o, pc.policy.dim(), pc.lambda_hint);
    r.prov.seed = cfg.seed;
    PathFunctionals fn;
    if (r.cfg.root.contains("lq")) {
        const LQSolution s = solve_lq(parse_lq(r.cfg.root["lq"], "lq"));
        fn.f = s.cost();
        fn.q = s.discount();
    }
    const PathBundle b = simulate(pc.policy, cfg, fn);

    auto cols = coord_names(b.dim);
    cols.insert(cols.begin(), {"path", "t"});
    for (const char* c : {"action_id", "gamma", "running_cost"})
        cols.push_back(c);
    CsvWriter w((r.out / "paths.csv").string(), r.prov, cols, Json{{"policy", pc.policy.name()}});
    for (int p = 0; p < b.n_paths; ++p) {
        for (int k = 0; k < b.n_records; ++k) {
            const std::size_t i = b.at(p, k);
            std::vector<double> row{static_cast<double>(p), b.times[k]};
            for (int d = 0; d < b.dim; ++d)
                row.push_back(b.state[i * b.dim + d]);
            row.push_back(b.action_id[i]);
            row.push_back(b.gamma[i]);
            row.push_back(b.running_cost[i]);
            w.row(row);
        }
    }
    w.close();

    Json rep{{"n_paths", b.n_paths}, {"T", cfg.T}, {"dt", cfg.dt}, {"lambda_max", cfg.lambda_max}};
    long diverged = 0, violated = 0;
    for (int p = 0; p < b.n_paths; ++p) {
        diverged += b.diverged[p];
        violated += b.violated[p];
    }
    rep["diverged_paths"] = diverged;
    rep["violating_paths"] = violated;
    if (b.has_characteristics) {
        const CharacteristicsReport cr = characteristics_report(b);
        rep["characteristics"] = to_json(cr);
        rep["jump_count_vs_compensator_z"] =
            json_number(cr.jump_count_se > 0 ? (cr.jump_count_mean - cr.compensator_mean) / cr.jump_count_se : 0.0);
    }
    if (fn.f)
        rep["payoff"] = to_json(payoff_from_bundle(b, solve_lq(parse_lq(r.cfg.root["lq"], "lq")).q));
    write_json((r.out / "characteristics.json").string(), r.prov, rep);
    return kOk;
}

// (1 - ((x - c)/r)^2)^3 on |x - c| < r, with exact derivatives.
ScalarField bump(double c, double r)
{
    auto z_of = [c, r](const Vec& x) { return (x[0] - c) / r; };
    return ScalarField::analytic(
        1,
        [z_of](const Vec& x) {
            const double z = z_of(x);
            return std::abs(z) < 1.0 ? std::pow(1.0 - z * z, 3) : 0.0;
        },
        [z_of, r](const Vec& x) -> Vec {
            const double z = z_of(x), w = 1.0 - z * z;
            return Vec::Constant(1, std::abs(z) < 1.0 ? -6.0 * z * w * w / r : 0.0);
        },
        [z_of, r](const Vec& x) -> Mat {
            const double z = z_of(x), w = 1.0 - z * z;
            return Mat::Constant(1, 1, std::abs(z) < 1.0 ? (-6.0 * w * w + 24.0 * z * z * w) / (r * r) : 0.0);
        },
        0);
}

std::vector<std::pair<int, int>> record_pairs(const Json& j, const std::vector<double>& times, const std::string& at)
{
    std::vector<std::pair<int, int>> out;
    if (!j.is_array())
        throw ConfigError(at, "expected an array of [s, t] time pairs");
    for (std::size_t k = 0; k < j.size(); ++k) {
        const Vec st = parse_vector(j[k], 2, at + "[" + std::to_string(k) + "]");
        out.push_back({record_index(times, st[0]), record_index(times, st[1])});
    }
    return out;
}

std::vector<double> time_list(const Json& j, const std::string& at)
{
    const Vec v = parse_vector(j, -1, at);
    return std::vector<double>(v.data(), v.data() + v.size());
}

int cmd_verify(const Options& o)
{
    Run r = open_run(o, "verify");
    const Json& root = r.cfg.root;
    const Json& tests = require(root, "tests", "");
    if (!tests.is_array() || tests.empty())
        throw ConfigError("tests", "expected a non-empty array");
    Json reports = Json::array();
    bool all = true;
    std::uint64_t seed_used = 0;
    for (std::size_t k = 0; k < tests.size(); ++k) {
        const std::string at = "tests[" + std::to_string(k) + "]";
        const Json& t = tests[k];
        const std::string kind = require(t, "kind", at).get<std::string>();
        const PolicyChoice pc = parse_policy(require(t, "policy", at), root, at + ".policy");
        TestReport rep;
        if (kind == "growth") {
            const int n = pc.policy.dim();
            rep = growth_certificate_check(pc.policy, parse_vector(require(t, "lo", at), n, at + ".lo"),
                                           parse_vector(require(t, "hi", at), n, at + ".hi"),
                                           t.value("points", 41), parse_number(require(t, "K", at), at + ".K"),
                                           parse_number(require(t, "p", at), at + ".p"));
        } else {
            SimConfig cfg = simulation(r, o, pc.policy.dim(), pc.lambda_hint);
            seed_used = cfg.seed;
            if (kind == "martingale" || kind == "submartingale") {
                const ScalarField phi = parse_phi(require(t, "phi", at), root, at + ".phi");
                const LQSolution s = solve_lq(parse_lq(require(root, "lq", ""), "lq"));
                PathFunctionals fn;
                fn.f = s.cost();
                fn.q = s.discount();
                const PathBundle b = simulate(pc.policy, cfg, fn);
                const BellmanSeries S = bellman_series(phi, b);
                BinningOptions bo;
                bo.n_bins = t.value("bins", 10);
                rep = submartingale_test(S, record_pairs(require(t, "pairs", at), b.times, at + ".pairs"),
                                         kind == "martingale" ? MartingaleMode::Martingale
                                                              : MartingaleMode::Submartingale,
                                         bo);
            } else if (kind == "transversality") {
                const ScalarField phi = parse_phi(require(t, "phi", at), root, at + ".phi");
                const double q = parse_number(require(t, "q", at), at + ".q");
                rep = transversality_test(pc.policy, phi, time_list(require(t, "times", at), at + ".times"), cfg,
                                          [q](const Vec&, const Action&) { return q; });
            } else if (kind == "h2") {
                cfg.record_characteristics = true;
                const double p = t.value("p", 2.0);
                cfg.p = p;
                rep = h2_integrability_check(simulate(pc.policy, cfg), p);
            } else if (kind == "dynkin") {
                std::vector<ScalarField> fs;
                const Json& fns = require(t, "bumps", at);
                for (std::size_t i = 0; i < fns.size(); ++i) {
                    const std::string ba = at + ".bumps[" + std::to_string(i) + "]";
                    const double c = parse_number(require(fns[i], "center", ba), ba + ".center");
                    const double rad = parse_number(require(fns[i], "radius", ba), ba + ".radius");
                    fs.push_back(bump(c, rad));
                }
                rep = dynkin_test(pc.policy, fs, time_list(require(t, "times", at), at + ".times"), cfg);
            } else {
                throw ConfigError(at + ".kind", "unknown test '" + kind +
                                                    "' (martingale, submartingale, transversality, h2, growth, dynkin)");
            }
        }
        const bool expect_fail = t.value("expect_fail", false);
        Json jr = to_json(rep);
        jr["expect_fail"] = expect_fail;
        jr["policy"] = pc.policy.name();
        reports.push_back(jr);
        const bool ok = rep.pass != expect_fail;
        all = all && ok;
        spdlog::info("{:<16} {:<14} {}", rep.name, pc.policy.name(), rep.pass ? "PASS" : "FAIL");
        std::cout << rep.name << " [" << pc.policy.name() << "]: " << (rep.pass ? "PASS" : "FAIL")
                  << (expect_fail ? " (expected FAIL)" : "") << "  failures " << rep.failures() << "/"
                  << rep.stats.size() << "\n";
    }
    r.prov.seed = seed_used;
    write_json((r.out / "report.json").string(), r.prov, Json{{"all_pass", all}, {"tests", reports}});
    return all ? kOk : kVerification;
}

Grid example_grid(const Json& ex, double lo, double hi, int n)
{
    return ex.contains("grid") ? parse_grid(ex["grid"], "example.grid") : Grid::line(lo, hi, n);
}

int cmd_example(const Options& o)
{
    Run r = open_run(o, "example " + std::to_string(o.which), false);
    const Json ex = r.cfg.root.contains("example") ? r.cfg.root["example"] : Json::object();
    const SolveOptions opt = solver_options(r, o);
    const double q = ex.contains("q") ? parse_number(ex["q"], "example.q") : (o.which == 3 ? 3.0 : 1.0);
    const Poly f = ex.contains("f") ? parse_poly(ex["f"], "example.f") : Poly({0.0, 0.0, 1.0});

    if (o.which == 1) {
        const Grid g = example_grid(ex, -6.0, 6.0, 601);
        const ValueField psi = example1_psi(f, q, g);
        const ValueField V = example1_value(psi, q);
        const Poly Vx = example1_value_exact(f, q);
        const StationarySolution s = solve_stationary(example1_problem({f, q, 2.0}), g, opt);
        const Json hdr{{"q", q}, {"f", f.coeffs()}};
        CsvWriter w((r.out / "example1.csv").string(), r.prov, {"x", "psi", "V", "V_closed_form", "V_solver", "action_id"},
                    hdr);
        double err_closed = 0.0, err_solver = 0.0, scale = 0.0;
        const Axis& ax = g.axis(0);
        for (int i = 0; i < g.size(); ++i) {
            const double x = ax.coord(i);
            w.row({x, psi.at(i), V.at(i), Vx(x), s.value.at(i), static_cast<double>(s.policy.family[i])});
            if (std::abs(x) <= (ax.hi - ax.lo) / 6.0 + 1e-12) {
                err_closed = std::max(err_closed, std::abs(V.at(i) - Vx(x)));
                err_solver = std::max(err_solver, std::abs(s.value.at(i) - V.at(i)));
                scale = std::max(scale, std::abs(V.at(i)));
            }
        }
        w.close();
        Json rep{{"V0", V(Vec::Zero(1))},
                 {"psi0", psi(Vec::Zero(1))},
                 {"max_error_vs_closed_form", err_closed},
                 {"general_solver",
                  {{"relative_sup_error_middle_third", err_solver / std::max(scale, 1e-300)},
                   {"convergence", to_json(s.report)}}}};
        write_json((r.out / "report.json").string(), r.prov, rep);
        std::cout << "V(0) = " << format_double(V(Vec::Zero(1))) << "\n";
        return kOk;
    }
    if (o.which == 2) {
        const double kappa = ex.contains("kappa") ? parse_number(ex["kappa"], "example.kappa") : 1.0;
        const Grid g = example_grid(ex, -6.0, 6.0, 601);
        const Example2Solution sol = example2_free_boundary(f, q, kappa, g);
        const StationarySolution s = solve_stationary(example2_problem(f, q, kappa), g, opt);
        const double sw = example2_switch_point(s.policy);
        Json diag{{"b_hat", sol.b_hat},
                  {"kappa", kappa},
                  {"q", q},
                  {"gap", sol.gap},
                  {"c1_gap", sol.c1_gap},
                  {"c2_gap", sol.c2_gap},
                  {"c2_gap_grid", sol.c2_gap_grid},
                  {"increasing", sol.increasing},
                  {"solver_switch_point", json_number(sw)},
                  {"switch_offset_cells", json_number(std::abs(sw - sol.b_hat) / g.spacing())}};
        CsvWriter w((r.out / "example2.csv").string(), r.prov, {"x", "phi", "dphi", "V_solver", "action_id"}, diag);
        for (int i = 0; i < g.size(); ++i) {
            const double x = g.axis(0).coord(i);
            w.row({x, sol.phi(x), sol.phi.derivative(x), s.value.at(i), static_cast<double>(s.policy.family[i])});
        }
        w.close();
        diag["general_solver"] = to_json(s.report);
        write_json((r.out / "report.json").string(), r.prov, diag);
        std::cout << "b_hat = " << format_double(sol.b_hat) << "\n";
        return kOk;
    }
    // quadratic control, scalar diagonal case
    const double lambda = ex.value("lambda", 1.0), theta = ex.value("theta", 1.0), u = ex.value("u", 1.0);
    const double sigma = ex.value("sigma", 1.0);
    const LQSpec spec = LQSpec::scalar(lambda, theta, q, u, sigma);
    const LQSolution sol = solve_lq(spec);
    const DiagonalLQ formula = example3_diagonal(lambda, theta, q, u, sigma * sigma);
    Json rep{{"solver", to_json(sol)},
             {"formula", {{"p", formula.p}, {"B", formula.B}, {"c", formula.c}, {"d", formula.d}}},
             {"abs_diff", {{"B", std::abs(sol.B(0, 0) - formula.B)},
                           {"c", std::abs(sol.c[0] - formula.c)},
                           {"d", std::abs(sol.d - formula.d)}}}};
    const Grid g = example_grid(ex, -6.0, 6.0, 401);
    const DriftLattice lat{Vec::Constant(1, -2.0), Vec::Constant(1, 2.0), {81}};
    const StationarySolution s = solve_stationary(lq_problem(spec, lat), g, opt);
    CsvWriter w((r.out / "example3.csv").string(), r.prov, {"x", "V_closed_form", "V_solver", "mu_closed_form", "mu_solver"},
                Json{{"lambda", lambda}, {"theta", theta}, {"q", q}, {"u", u}});
    for (int i = 0; i < g.size(); ++i) {
        const Vec x = g.point(i);
        w.row({x[0], sol.value(x), s.value.at(i), sol.feedback(x)[0], s.policy.mu(0, i)});
    }
    w.close();
    Json cross = Json::object();
    cross["closed_form"] = lq_comparison(Json{{"lq", {{"Lambda", lambda}, {"Theta", theta}, {"q", q}, {"u", {u}},
                                                      {"candidates", {{{"sigma", sigma}}}}}}},
                                         s.value);
    cross["convergence"] = to_json(s.report);
    rep["general_solver"] = cross;
    write_json((r.out / "report.json").string(), r.prov, rep);
    std::cout << "B = " << format_double(sol.B(0, 0)) << "  c = " << format_double(sol.c[0])
              << "  d = " << format_double(sol.d) << "\n";
    return kOk;
}

void setup_logging()
{
    auto logger = spdlog::stderr_color_mt("jumpctl");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("JUMPCTL_LOG")) {
        const auto l = spdlog::level::from_str(lvl);
        if (l == spdlog::level::off && std::string(lvl) != "off")
            spdlog::warn("JUMPCTL_LOG='{}' not understood; expected error, warn, info or debug", lvl);
        else
            spdlog::set_level(l);
    }
}

int dispatch(const std::string& cmd, const Options& o)
{
    if (o.threads > 0)
        omp_set_num_threads(o.threads);
    try {
        if (cmd == "solve")
            return cmd_solve(o);
        if (cmd == "solve-finite")
            return cmd_solve_finite(o);
        if (cmd == "simulate")
            return cmd_simulate(o);
        if (cmd == "verify")
            return cmd_verify(o);
        return cmd_example(o);
    } catch (const ConfigError& e) {
        spdlog::error("input error: {}", e.what());
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const StructuralError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumerical;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    setup_logging();
    CLI::App app{"Controlled jump processes: HJB solver, simulator and verifiers"};
    app.require_subcommand(1);
    Options o;
    auto common = [&o](CLI::App* sc, bool need_config) {
        auto* c = sc->add_option("--config", o.config, "JSON config file");
        if (need_config)
            c->required()->check(CLI::ExistingFile);
        else
            c->check(CLI::ExistingFile);
        sc->add_option("--out", o.out, "output directory")->capture_default_str();
        sc->add_option("--seed", o.seed, "random seed (overrides the config)");
        sc->add_option("--threads", o.threads, "worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
        sc->add_option("--tol", o.tol, "solver tolerance (overrides the config)")->check(CLI::PositiveNumber);
    };
    std::string chosen;
    const std::pair<const char*, const char*> cmds[] = {
        {"solve", "stationary HJB by policy iteration"},
        {"solve-finite", "finite-horizon HJB, backward in time"},
        {"simulate", "Monte Carlo paths under a policy"},
        {"verify", "martingale, transversality and growth checks"}};
    for (const auto& [name, help] : cmds) {
        auto* sc = app.add_subcommand(name, help);
        common(sc, true);
        sc->callback([&chosen, name] { chosen = name; });
    }
    auto* ex = app.add_subcommand("example", "closed-form examples 1, 2 and 3");
    ex->add_option("which", o.which, "example number")->required()->check(CLI::IsMember({1, 2, 3}));
    common(ex, false);
    ex->callback([&chosen] { chosen = "example"; });
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInput;
    }
    return dispatch(chosen, o);
}
