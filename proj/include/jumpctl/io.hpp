#pragma once

#include "jumpctl/config.hpp"
#include "jumpctl/dynamics.hpp"
#include "jumpctl/examples.hpp"
#include "jumpctl/hjb.hpp"
#include "jumpctl/lq.hpp"
#include "jumpctl/verify.hpp"

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace jumpctl {

inline constexpr const char* kVersion = "0.1.0";

/// Identifies the inputs of an artifact: config hash, seed, version.
struct Provenance {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string command;

    Json to_json() const;
};

/// 17 significant digits, shortest exact round trip for doubles.
std::string format_double(double v);

/// CSV with a one-line "# {json}" header; `extra` is merged into the header.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const Provenance& prov, const std::vector<std::string>& columns,
              const Json& extra = Json::object());
    void row(const std::vector<double>& values);
    void close();

private:
    std::ofstream out_;
    std::string path_;
    std::size_t columns_;
};

/// Non-finite doubles become the strings "inf", "-inf", "nan".
Json json_number(double v);

/// Writes `body` with a "provenance" member, pretty-printed, doubles at 17 digits.
void write_json(const std::string& path, const Provenance& prov, Json body);

Json to_json(const TestReport& r);
Json to_json(const ConvergenceReport& r);
Json to_json(const CharacteristicsReport& r);
Json to_json(const LQSolution& s);
Json to_json(const PayoffEstimate& e);

}  // namespace jumpctl
