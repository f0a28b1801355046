#include "jumpctl/io.hpp"

#include <cmath>
#include <cstdio>

namespace jumpctl {

namespace {

Json vec_json(const Vec& v)
{
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(json_number(v[i]));
    return a;
}

Json mat_json(const Mat& m)
{
    Json a = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        a.push_back(vec_json(m.row(r).transpose()));
    return a;
}

Json list_json(const std::vector<double>& v)
{
    Json a = Json::array();
    for (double x : v)
        a.push_back(json_number(x));
    return a;
}

}  // namespace

Json json_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json Provenance::to_json() const
{
    return Json{{"config_hash", hex64(config_hash)}, {"seed", seed}, {"version", kVersion}, {"command", command}};
}

CsvWriter::CsvWriter(const std::string& path, const Provenance& prov, const std::vector<std::string>& columns,
                     const Json& extra)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), columns_(columns.size())
{
    if (!out_)
        throw Error("cannot write " + path);
    Json header = prov.to_json();
    for (auto it = extra.begin(); it != extra.end(); ++it)
        header[it.key()] = it.value();
    out_ << "# " << header.dump() << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values)
{
    if (values.size() != columns_)
        throw Error("csv row width mismatch in " + path_);
    for (std::size_t i = 0; i < values.size(); ++i)
        out_ << (i ? "," : "") << format_double(values[i]);
    out_ << "\n";
}

void CsvWriter::close()
{
    out_.close();
    if (out_.fail())
        throw Error("failed writing " + path_);
}

void write_json(const std::string& path, const Provenance& prov, Json body)
{
    body["provenance"] = prov.to_json();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write " + path);
    out << body.dump(2) << "\n";
    if (!out)
        throw Error("failed writing " + path);
}

Json to_json(const TestReport& r)
{
    Json stats = Json::array();
    for (const auto& s : r.stats)
        stats.push_back({{"label", s.label},
                         {"value", json_number(s.value)},
                         {"std_error", json_number(s.std_error)},
                         {"threshold", json_number(s.threshold)},
                         {"n", s.n},
                         {"pass", s.pass},
                         {"excluded", s.excluded}});
    return {{"name", r.name}, {"pass", r.pass}, {"failures", r.failures()}, {"statistics", stats}, {"notes", r.notes}};
}

Json to_json(const ConvergenceReport& r)
{
    return {{"converged", r.converged},
            {"iterations", r.iterations},
            {"value_change", list_json(r.value_change)},
            {"linear_residual", list_json(r.linear_residual)},
            {"hjb_residual", json_number(r.hjb_residual)},
            {"hjb_min", json_number(r.hjb_min)},
            {"nonmonotone_rows", r.nonmonotone_rows},
            {"condition_estimate", json_number(r.condition_estimate)},
            {"tail_residual", json_number(r.tail_residual)},
            {"effective_tail_degree", r.effective_tail_degree},
            {"warnings", r.warnings}};
}

Json to_json(const CharacteristicsReport& r)
{
    return {{"n_paths", r.n_paths},
            {"T", json_number(r.T)},
            {"drift_observed_mean", vec_json(r.drift_observed_mean)},
            {"drift_formula_mean", vec_json(r.drift_formula_mean)},
            {"drift_max_gap", json_number(r.drift_max_gap)},
            {"covariation_mean", mat_json(r.covariation_mean)},
            {"covariation_min_eig", json_number(r.covariation_min_eig)},
            {"jump_count_mean", json_number(r.jump_count_mean)},
            {"jump_count_se", json_number(r.jump_count_se)},
            {"compensator_mean", json_number(r.compensator_mean)},
            {"bin_edges", list_json(r.bin_edges)},
            {"bin_observed", list_json(r.bin_observed)},
            {"bin_expected", list_json(r.bin_expected)},
            {"bin_z", list_json(r.bin_z)},
            {"max_abs_z", json_number(r.max_abs_z)}};
}

Json to_json(const LQSolution& s)
{
    return {{"B", mat_json(s.B)},
            {"c", vec_json(s.c)},
            {"d", json_number(s.d)},
            {"Q", mat_json(s.Q)},
            {"v", vec_json(s.v)},
            {"P", mat_json(s.P)},
            {"delta_hat", json_number(s.delta_hat)},
            {"chosen_candidate", s.chosen},
            {"riccati_residual", json_number(s.riccati_residual)}};
}

Json to_json(const PayoffEstimate& e)
{
    return {{"estimate", json_number(e.estimate)},
            {"std_error", json_number(e.std_error)},
            {"tail_bound", json_number(e.tail_bound)},
            {"growth_rate", json_number(e.growth_rate)},
            {"n_paths", e.n_paths}};
}

}  // namespace jumpctl
