// Command-line front end: spectral gaps, protocol conversion, simulated
// verification runs, and sample-count comparison data.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <random>

#include "qsv/convert.hpp"
#include "qsv/serialize.hpp"
#include "qsv/simulate.hpp"

namespace {

using namespace qsv;

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct Options {
    std::string family = "W";
    int n = 0;
    int k = 1;
    std::string mode = "adaptive";
    double eps = 0.1;
    double delta = 0.05;
    std::uint64_t trials = 10000;
    std::int64_t seed = -1;
    bool merge = false;
    std::string format = "text";
    std::string sampling = "bernoulli";
    std::string out;
    std::string scatter_out;
    std::vector<double> eps_grid;
};

Family parse_family(const std::string& name) {
    if (name == "bell3") return Family::Bell3;
    if (name == "bell2") return Family::Bell2;
    if (name == "W" || name == "w") return Family::W;
    if (name == "D" || name == "d") return Family::Dicke;
    throw std::domain_error("unknown family: " + name);
}

Mode parse_mode(const std::string& name) {
    if (name == "adaptive") return Mode::Adaptive;
    if (name == "nonadaptive") return Mode::Nonadaptive;
    throw std::domain_error("unknown mode: " + name);
}

std::uint64_t resolve_seed(std::int64_t seed, std::ostream& log) {
    if (seed >= 0) return static_cast<std::uint64_t>(seed);
    std::random_device dev;
    std::uint64_t drawn = (static_cast<std::uint64_t>(dev()) << 32) ^ dev();
    log << "seed: " << drawn << "\n";
    return drawn;
}

void emit(const Options& opt, const std::string& text) {
    if (opt.out.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream file(opt.out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file: " + opt.out);
    file << text;
}

int cmd_gap(const Options& opt) {
    Family family = parse_family(opt.family);
    Mode mode = parse_mode(opt.mode);
    Rational nu = closed_form_gap(family, mode, opt.n, opt.k);
    Rational lambda2 = Rational(1) - nu;

    Strategy s = assemble_strategy(family, mode, opt.n, opt.k);
    SpectralReport report = spectral_gap(s);
    if (std::abs(report.nu - nu.value()) > 1e-10)
        throw std::runtime_error("numeric gap disagrees with the closed form");

    GapRecord record{family_name(family),
                     family == Family::Bell3 || family == Family::Bell2 ? 2 : opt.n,
                     family == Family::Dicke ? opt.k : (family == Family::W ? 1 : 0),
                     mode_name(mode), lambda2, nu, report.multiplicity2, report.method};
    if (opt.format == "json") {
        emit(opt, gap_record_to_json(record, 1));
    } else {
        std::ostringstream text;
        text << "strategy: " << s.name() << "\n"
             << "lambda2 = " << lambda2.str() << " (" << format_double(lambda2.value()) << ")\n"
             << "nu = " << nu.str() << " (" << format_double(nu.value()) << ")\n"
             << "multiplicity = " << report.multiplicity2 << "\n"
             << "method = " << report.method << "\n";
        emit(opt, text.str());
    }
    return 0;
}

int cmd_table(const Options& opt) {
    std::uint64_t seed = resolve_seed(opt.seed, std::cerr);
    auto rows = run_table(opt.trials, seed);
    emit(opt, table_to_csv(rows));
    return 0;
}

int cmd_compare(const Options& opt) {
    if (opt.n < 4) throw std::domain_error("compare: need n >= 4");
    double nu_adaptive = closed_form_gap(Family::Dicke, Mode::Adaptive, opt.n, opt.k).value();
    double nu_nonadaptive = closed_form_gap(Family::Dicke, Mode::Nonadaptive, opt.n, opt.k).value();
    std::vector<double> grid = opt.eps_grid.empty() ? default_eps_grid() : opt.eps_grid;
    std::vector<CompareRow> rows;
    for (double eps : grid) {
        rows.push_back({eps, required_tests(nu_adaptive, eps, opt.delta).approx,
                        required_tests(nu_nonadaptive, eps, opt.delta).approx,
                        required_tests(1.0, eps, opt.delta).approx});
    }
    emit(opt, compare_to_csv(rows));
    return 0;
}

int cmd_convert(const Options& opt) {
    Family family = parse_family(opt.family);
    Strategy s = assemble_strategy(family, Mode::Adaptive, opt.n, opt.k);
    ConversionResult result = convert_strategy(s, opt.merge);

    std::optional<Rational> gap_in, gap_out;
    if (family == Family::W || family == Family::Dicke) {
        gap_in = closed_form_gap(family, Mode::Adaptive, opt.n, opt.k);
        if (opt.merge) gap_out = closed_form_gap(family, Mode::Nonadaptive, opt.n, opt.k);
    }
    emit(opt, conversion_to_json(result, gap_in, gap_out, opt.merge,
                                 opt.format == "json" ? 1 : -1));
    return 0;
}

int cmd_simulate(const Options& opt) {
    Family family = parse_family(opt.family);
    Mode mode = parse_mode(opt.mode);
    Strategy s = assemble_strategy(family, mode, opt.n, opt.k);

    SimulationConfig cfg;
    cfg.trials = opt.trials;
    cfg.seed = resolve_seed(opt.seed, std::cerr);
    cfg.eps_grid = opt.eps_grid;
    if (opt.sampling == "procedure")
        cfg.mode = SampleMode::Procedure;
    else if (opt.sampling != "bernoulli")
        throw std::domain_error("unknown sampling mode: " + opt.sampling);
    SimulationReport report = simulate(s, cfg);

    if (!opt.scatter_out.empty()) {
        std::ofstream file(opt.scatter_out, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open output file: " + opt.scatter_out);
        file << scatter_csv(report);
    }
    emit(opt, opt.format == "csv" ? simulation_to_csv(report) : simulation_to_json(report));
    return 0;
}

int cmd_procedure(const Options& opt) {
    Family family = parse_family(opt.family);
    Strategy s = assemble_strategy(family, parse_mode(opt.mode), opt.n, opt.k);
    std::ostringstream text;
    std::uint64_t seed = resolve_seed(opt.seed, text);
    Rng rng = derive_stream(seed, 0, 0);

    NoisyInput input = make_noisy_input(s, opt.eps);
    std::vector<double> cdf;
    double acc = 0.0;
    for (const auto& wt : s.tests()) cdf.push_back(acc += wt.mu);
    cdf.back() = 1.0;
    std::size_t j = rng.categorical(cdf);
    const WeightedTest& test = s.tests()[j];
    if (!test.tree) throw std::runtime_error("selected test has no executable form");

    text << "strategy: " << s.name() << "  eps: " << format_double(opt.eps) << "\n";
    text << "selected test: " << test.name << "\n";
    ProcedureResult result = execute_branch_procedure(*test.tree, input.psi_prime, rng);
    for (const auto& record : result.transcript)
        text << "  qubit " << record.qubit + 1 << "  axis " << record.axis << "  outcome "
             << record.outcome << "\n";
    if (result.branch_index < 0)
        text << "  no second stage: outcome pattern outside every branch\n";
    text << "result: " << (result.pass ? "pass" : "fail") << "\n";
    emit(opt, text.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Verification strategies for Dicke and W states: exact spectral gaps, "
                 "adaptive-to-nonadaptive conversion, and simulated verification runs"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* cmd, bool with_mode) {
        cmd->add_option("--family", opt.family, "bell3, bell2, W, or D");
        cmd->add_option("--n", opt.n, "qubit count");
        cmd->add_option("--k", opt.k, "excitation count (Dicke only)");
        if (with_mode) cmd->add_option("--mode", opt.mode, "adaptive or nonadaptive");
        cmd->add_option("--format", opt.format, "text, json, or csv");
        cmd->add_option("--out", opt.out, "write output to this path");
    };

    CLI::App* gap = app.add_subcommand("gap", "exact spectral gap of a built-in strategy");
    add_common(gap, true);

    CLI::App* table = app.add_subcommand("table", "fitted inverse gaps for the 14 benchmark states");
    table->add_option("--M", opt.trials, "trials per state and mode");
    table->add_option("--seed", opt.seed, "rng seed (drawn from entropy when omitted)");
    table->add_option("--out", opt.out, "write output to this path");

    CLI::App* compare = app.add_subcommand("compare", "sample counts of the protocols vs the global one");
    compare->add_option("--n", opt.n, "qubit count");
    compare->add_option("--k", opt.k, "excitation count");
    compare->add_option("--delta", opt.delta, "failure probability");
    compare->add_option("--eps", opt.eps_grid, "explicit infidelity grid");
    compare->add_option("--out", opt.out, "write output to this path");

    CLI::App* convert = app.add_subcommand("convert", "turn an adaptive strategy into a nonadaptive one");
    add_common(convert, false);
    convert->add_flag("--merge", opt.merge, "merge same-setting branches first");

    CLI::App* simulate_cmd = app.add_subcommand("simulate", "run the randomized verification experiment");
    add_common(simulate_cmd, true);
    simulate_cmd->add_option("--M", opt.trials, "trials per infidelity point");
    simulate_cmd->add_option("--seed", opt.seed, "rng seed (drawn from entropy when omitted)");
    simulate_cmd->add_option("--eps", opt.eps_grid, "explicit infidelity grid");
    simulate_cmd->add_option("--sampling", opt.sampling,
                             "bernoulli (exact pass probabilities) or procedure (full outcomes)");
    simulate_cmd->add_option("--scatter-out", opt.scatter_out, "also write scatter-plot CSV here");

    CLI::App* procedure = app.add_subcommand("procedure", "print one measurement transcript");
    add_common(procedure, true);
    procedure->add_option("--eps", opt.eps, "infidelity of the noisy input");
    procedure->add_option("--seed", opt.seed, "rng seed (drawn from entropy when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (gap->parsed()) return cmd_gap(opt);
        if (table->parsed()) return cmd_table(opt);
        if (compare->parsed()) return cmd_compare(opt);
        if (convert->parsed()) return cmd_convert(opt);
        if (simulate_cmd->parsed()) return cmd_simulate(opt);
        if (procedure->parsed()) return cmd_procedure(opt);
    } catch (const std::domain_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
