#include "qsv/serialize.hpp"

#include <array>
#include <charconv>
#include <json.hpp>
#include <limits>
#include <sstream>

namespace qsv {

using nlohmann::json;

std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string operator_to_json(const TestOperator& op, int indent) {
    json entries = json::array();
    for (const auto& [row, cols] : op.rows())
        for (const auto& [col, val] : cols)
            entries.push_back({row, col, val.real(), val.imag()});
    json doc{{"n", op.n()}, {"entries", std::move(entries)}};
    return doc.dump(indent);
}

TestOperator operator_from_json(const std::string& text) {
    json doc = json::parse(text);
    TestOperator op(doc.at("n").get<int>());
    for (const auto& e : doc.at("entries")) {
        op.add(e.at(0).get<std::uint64_t>(), e.at(1).get<std::uint64_t>(),
               cplx(e.at(2).get<double>(), e.at(3).get<double>()));
    }
    return op;
}

namespace {

json rational_json(const Rational& r) {
    return json{{"num", r.num}, {"den", r.den}};
}

}  // namespace

std::string gap_record_to_json(const GapRecord& record, int indent) {
    json doc{{"family", record.family},
             {"n", record.n},
             {"k", record.k},
             {"mode", record.mode},
             {"lambda2", rational_json(record.lambda2)},
             {"nu", rational_json(record.nu)},
             {"multiplicity", record.multiplicity},
             {"method", record.method},
             {"lambda2_value", record.lambda2.value()},
             {"nu_value", record.nu.value()}};
    return doc.dump(indent);
}

std::string conversion_to_json(const ConversionResult& result,
                               const std::optional<Rational>& gap_in,
                               const std::optional<Rational>& gap_out, bool merged, int indent) {
    json doc{{"input", result.input.name()},
             {"output", result.output.name()},
             {"merged", merged},
             {"alpha", result.alpha},
             {"gap_in_value", result.gap_in},
             {"gap_out_value", result.gap_out},
             {"guarantee_ok", result.guarantee_ok},
             {"tests_in", result.input.tests().size()},
             {"tests_out", result.output.tests().size()}};
    doc["gap_in"] = gap_in ? rational_json(*gap_in) : json(nullptr);
    doc["gap_out"] = gap_out ? rational_json(*gap_out) : json(nullptr);
    return doc.dump(indent);
}

std::string simulation_to_json(const SimulationReport& report, int indent) {
    json doc{{"strategy", report.strategy},
             {"sampling", report.sampling},
             {"noise", report.noise},
             {"M", report.trials},
             {"seed", report.seed},
             {"eps", report.eps_grid},
             {"deltas", report.deltas},
             {"samples", report.samples},
             {"thresholds", report.thresholds},
             {"overflow", report.overflow},
             {"fit", {{"inverse_gap", report.fitted_inverse_gap},
                      {"stddev", report.fitted_stddev}}}};
    return doc.dump(indent);
}

SimulationReport simulation_from_json(const std::string& text) {
    json doc = json::parse(text);
    SimulationReport report;
    report.strategy = doc.at("strategy").get<std::string>();
    report.sampling = doc.at("sampling").get<std::string>();
    report.noise = doc.at("noise").get<std::string>();
    report.trials = doc.at("M").get<std::uint64_t>();
    report.seed = doc.at("seed").get<std::uint64_t>();
    report.eps_grid = doc.at("eps").get<std::vector<double>>();
    report.deltas = doc.at("deltas").get<std::vector<double>>();
    report.samples = doc.at("samples").get<std::vector<std::vector<std::uint32_t>>>();
    report.thresholds = doc.at("thresholds").get<std::vector<std::vector<std::uint64_t>>>();
    report.overflow = doc.at("overflow").get<bool>();
    const auto& fit = doc.at("fit");
    report.fitted_inverse_gap = fit.at("inverse_gap").is_null()
                                    ? std::numeric_limits<double>::quiet_NaN()
                                    : fit.at("inverse_gap").get<double>();
    report.fitted_stddev = fit.at("stddev").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                      : fit.at("stddev").get<double>();
    return report;
}

std::string simulation_to_csv(const SimulationReport& report) {
    std::ostringstream out;
    out << "eps,delta,N\n";
    for (std::size_t e = 0; e < report.eps_grid.size(); ++e)
        for (std::size_t d = 0; d < report.deltas.size(); ++d)
            out << format_double(report.eps_grid[e]) << ',' << format_double(report.deltas[d])
                << ',' << report.thresholds[e][d] << '\n';
    return out.str();
}

std::string scatter_csv(const SimulationReport& report, std::size_t per_eps) {
    std::ostringstream out;
    out << "inv_eps,passes\n";
    for (std::size_t e = 0; e < report.eps_grid.size(); ++e) {
        std::size_t count = std::min(per_eps, report.samples[e].size());
        for (std::size_t i = 0; i < count; ++i)
            out << format_double(1.0 / report.eps_grid[e]) << ',' << report.samples[e][i] << '\n';
    }
    return out.str();
}

std::string table_to_csv(const std::vector<TableRow>& rows) {
    std::ostringstream out;
    out << "state,mode,fitted_inverse_gap,stddev,theory_inverse_gap\n";
    for (const auto& row : rows)
        out << row.state << ',' << mode_name(row.mode) << ',' << format_double(row.fitted) << ','
            << format_double(row.stddev) << ',' << format_double(row.theory) << '\n';
    return out.str();
}

std::string compare_to_csv(const std::vector<CompareRow>& rows) {
    std::ostringstream out;
    out << "eps,N_adaptive,N_nonadaptive,N_global\n";
    for (const auto& row : rows)
        out << format_double(row.eps) << ',' << format_double(row.n_adaptive) << ','
            << format_double(row.n_nonadaptive) << ',' << format_double(row.n_global) << '\n';
    return out.str();
}

}  // namespace qsv
