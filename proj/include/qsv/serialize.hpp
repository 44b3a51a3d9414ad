#pragma once

#include <string>

#include "qsv/convert.hpp"
#include "qsv/simulate.hpp"

namespace qsv {

// Sparse-triplet operator format: {"n": n, "entries": [[row, col, re, im], ...]}.
std::string operator_to_json(const TestOperator& op, int indent = -1);
TestOperator operator_from_json(const std::string& text);

struct GapRecord {
    std::string family;
    int n = 0;
    int k = 0;
    std::string mode;
    Rational lambda2;
    Rational nu;
    std::uint64_t multiplicity = 0;
    std::string method;
};
std::string gap_record_to_json(const GapRecord& record, int indent = -1);

std::string conversion_to_json(const ConversionResult& result,
                               const std::optional<Rational>& gap_in,
                               const std::optional<Rational>& gap_out, bool merged,
                               int indent = -1);

std::string simulation_to_json(const SimulationReport& report, int indent = -1);
SimulationReport simulation_from_json(const std::string& text);

// CSV emitters: comma separator, header row, LF line endings. Doubles are
// printed with shortest round-trip formatting.
std::string simulation_to_csv(const SimulationReport& report);
std::string scatter_csv(const SimulationReport& report, std::size_t per_eps = 500);
std::string table_to_csv(const std::vector<TableRow>& rows);

struct CompareRow {
    double eps = 0.0;
    double n_adaptive = 0.0;
    double n_nonadaptive = 0.0;
    double n_global = 0.0;
};
std::string compare_to_csv(const std::vector<CompareRow>& rows);

std::string format_double(double v);

}  // namespace qsv
