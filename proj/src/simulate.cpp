#include "qsv/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>

namespace qsv {

namespace {

// Detects a Dicke target: uniform positive amplitudes over one weight sector.
std::optional<int> dicke_excitations(const Ket& target) {
    if (target.amplitudes().empty()) return std::nullopt;
    int k = std::popcount(target.amplitudes().begin()->first);
    std::uint64_t expected = binom(target.n(), k);
    if (target.support_size() != expected) return std::nullopt;
    double amp = 1.0 / std::sqrt(static_cast<double>(expected));
    for (const auto& [label, a] : target.amplitudes()) {
        if (std::popcount(label) != k) return std::nullopt;
        if (std::abs(a - cplx(amp)) > 1e-12) return std::nullopt;
    }
    return k;
}

Ket canonical_phase(const Ket& v) {
    for (const auto& [label, a] : v.amplitudes()) {
        if (std::abs(a) > 1e-8) {
            cplx phase = std::conj(a) / std::abs(a);
            return scaled(v, phase);
        }
    }
    return v;
}

}  // namespace

Ket worst_case_noise(const Strategy& s) {
    SpectralReport report = spectral_gap(s);
    if (report.lambda2 < 1e-12)
        throw std::domain_error("worst_case_noise: strategy has no second eigenspace");

    if (auto k = dicke_excitations(s.target()); k && s.n() >= 4 && *k >= 1 && *k <= s.n() - 1) {
        Ket phi = normalize(singlet_pair_state(0, 1, dicke_state(s.n() - 2, *k - 1)));
        Ket residual = add_scaled(s.op().apply(phi), -report.lambda2, phi);
        if (residual.norm() < 1e-9) return phi;
    }
    if (report.eigvecs2.empty())
        throw std::domain_error("worst_case_noise: second eigenspace not represented in support");
    return canonical_phase(report.eigvecs2.front());
}

NoisyInput make_noisy_input(const Strategy& s, double eps) {
    return make_noisy_input(s, worst_case_noise(s), eps);
}

NoisyInput make_noisy_input(const Strategy& s, const Ket& tau, double eps) {
    if (eps < 0.0 || eps > 1.0) throw std::domain_error("make_noisy_input: eps out of range");
    if (std::abs(inner(s.target(), tau)) > 1e-10)
        throw std::domain_error("make_noisy_input: noise vector overlaps the target");
    Ket psi = add_scaled(scaled(s.target(), std::sqrt(1.0 - eps)), std::sqrt(eps), tau);
    if (std::abs(psi.norm() - 1.0) > 1e-12)
        throw std::domain_error("make_noisy_input: input state failed to normalize");
    return {s.target(), tau, std::move(psi), eps};
}

ProtocolSampler::ProtocolSampler(const Strategy& s, const Ket& input, SampleMode mode)
    : strategy_(&s), input_(input), mode_(mode) {
    if (input.n() != s.n()) throw std::domain_error("ProtocolSampler: qubit counts differ");
    double acc = 0.0;
    for (const auto& wt : s.tests()) {
        acc += wt.mu;
        cdf_.push_back(acc);
        double p = wt.op.expectation(input).real();
        pass_prob_.push_back(std::clamp(p, 0.0, 1.0));
        if (mode == SampleMode::Procedure && !wt.tree)
            throw std::domain_error("ProtocolSampler: procedure mode needs branch trees");
    }
    cdf_.back() = 1.0;
}

TrialResult ProtocolSampler::run_once(Rng& rng, std::uint64_t cap) const {
    TrialResult result;
    while (true) {
        std::size_t j = rng.categorical(cdf_);
        bool pass;
        if (mode_ == SampleMode::Bernoulli) {
            pass = rng.bernoulli(pass_prob_[j]);
        } else {
            pass = execute_branch_procedure(*strategy_->tests()[j].tree, input_, rng).pass;
        }
        if (!pass) return result;
        ++result.passes;
        if (result.passes >= cap) {
            result.capped = true;  // target-like input
            return result;
        }
    }
}

TrialResult run_protocol_once(const Strategy& s, const Ket& input, Rng& rng, SampleMode mode,
                              std::uint64_t cap) {
    return ProtocolSampler(s, input, mode).run_once(rng, cap);
}

std::vector<double> default_eps_grid() {
    std::vector<double> grid(40);
    for (int i = 0; i < 40; ++i)
        grid[i] = 0.02 * std::pow(25.0, static_cast<double>(i) / 39.0);
    grid.back() = 0.5;
    return grid;
}

std::vector<double> default_delta_grid() {
    std::vector<double> grid(100);
    for (int i = 0; i < 100; ++i) grid[i] = 0.01 + (0.2 - 0.01) * static_cast<double>(i) / 99.0;
    return grid;
}

SimulationReport simulate(const Strategy& s, const SimulationConfig& cfg) {
    SimulationConfig c = cfg;
    if (c.eps_grid.empty()) c.eps_grid = default_eps_grid();
    if (c.deltas.empty()) c.deltas = default_delta_grid();
    if (c.trials < 100) throw std::domain_error("simulate: need at least 100 trials");
    for (double d : c.deltas) {
        if (static_cast<std::uint64_t>(std::floor(d * static_cast<double>(c.trials))) < 1)
            throw std::domain_error("simulate: floor(delta * M) must be at least 1");
    }
    for (double e : c.eps_grid)
        if (e <= 0.0 || e > 1.0) throw std::domain_error("simulate: eps out of range");

    SimulationReport report;
    report.strategy = s.name();
    report.sampling = c.mode == SampleMode::Bernoulli ? "bernoulli" : "procedure";
    report.noise = "deterministic unit vector in the second eigenspace";
    report.trials = c.trials;
    report.seed = c.seed;
    report.eps_grid = c.eps_grid;
    report.deltas = c.deltas;
    report.samples.assign(c.eps_grid.size(), {});
    report.thresholds.assign(c.eps_grid.size(), {});

    Ket tau = worst_case_noise(s);

    int threads = c.threads > 0 ? c.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(c.eps_grid.size())));

    std::vector<char> overflow(c.eps_grid.size(), 0);
    auto run_eps = [&](std::size_t e) {
        NoisyInput input = make_noisy_input(s, tau, c.eps_grid[e]);
        ProtocolSampler sampler(s, input.psi_prime, c.mode);
        auto& column = report.samples[e];
        column.resize(c.trials);
        for (std::uint64_t i = 0; i < c.trials; ++i) {
            Rng rng = derive_stream(c.seed, e, i);
            TrialResult t = sampler.run_once(rng, c.cap);
            column[i] = static_cast<std::uint32_t>(t.passes);
            if (t.capped) overflow[e] = 1;
        }
        std::vector<std::uint32_t> sorted = column;
        std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
        auto& row = report.thresholds[e];
        row.resize(c.deltas.size());
        for (std::size_t d = 0; d < c.deltas.size(); ++d) {
            auto idx = static_cast<std::size_t>(
                std::floor(c.deltas[d] * static_cast<double>(c.trials)));
            row[d] = sorted[idx - 1];
        }
    };

    if (threads == 1) {
        for (std::size_t e = 0; e < c.eps_grid.size(); ++e) run_eps(e);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t e = t; e < c.eps_grid.size(); e += threads) run_eps(e);
            });
        }
        for (auto& th : pool) th.join();
    }
    report.overflow = std::any_of(overflow.begin(), overflow.end(), [](char f) { return f != 0; });

    if (report.eps_grid.size() >= 2 && report.deltas.size() >= 2) {
        auto [estimate, stddev] = fit_inverse_gap(report);
        report.fitted_inverse_gap = estimate;
        report.fitted_stddev = stddev;
    } else {
        report.fitted_inverse_gap = std::numeric_limits<double>::quiet_NaN();
        report.fitted_stddev = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

std::pair<double, double> fit_inverse_gap(const SimulationReport& report) {
    if (report.eps_grid.size() < 2) throw std::domain_error("fit_inverse_gap: need >= 2 eps points");
    if (report.deltas.size() < 2) throw std::domain_error("fit_inverse_gap: need >= 2 deltas");
    std::vector<double> slopes;
    slopes.reserve(report.deltas.size());
    for (std::size_t d = 0; d < report.deltas.size(); ++d) {
        double log_inv_delta = std::log(1.0 / report.deltas[d]);
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t e = 0; e < report.eps_grid.size(); ++e) {
            double x = log_inv_delta / report.eps_grid[e];
            double y = static_cast<double>(report.thresholds[e][d]);
            sxy += x * y;
            sxx += x * x;
        }
        if (sxx == 0.0) throw std::domain_error("fit_inverse_gap: degenerate grid");
        slopes.push_back(sxy / sxx);
    }
    double mean = 0.0;
    for (double v : slopes) mean += v;
    mean /= static_cast<double>(slopes.size());
    double var = 0.0;
    for (double v : slopes) var += (v - mean) * (v - mean);
    var /= static_cast<double>(slopes.size() - 1);
    return {mean, std::sqrt(var)};
}

std::vector<TableConfig> table_configs() {
    std::vector<TableConfig> rows;
    for (int n = 3; n <= 8; ++n) rows.push_back({"W" + std::to_string(n), Family::W, n, 1});
    auto dicke = [&](int n, int k) {
        rows.push_back({"D" + std::to_string(n) + "^" + std::to_string(k), Family::Dicke, n, k});
    };
    dicke(4, 2);
    dicke(5, 2);
    dicke(6, 2);
    dicke(6, 3);
    dicke(7, 2);
    dicke(7, 3);
    dicke(8, 2);
    dicke(8, 4);
    return rows;
}

std::vector<TableRow> run_table(std::uint64_t trials, std::uint64_t seed, int threads) {
    std::vector<TableRow> rows;
    auto configs = table_configs();
    for (std::size_t r = 0; r < configs.size(); ++r) {
        const auto& cfg = configs[r];
        for (Mode mode : {Mode::Adaptive, Mode::Nonadaptive}) {
            Strategy s = assemble_strategy(cfg.family, mode, cfg.n, cfg.k);
            SimulationConfig sim;
            sim.trials = trials;
            sim.seed = splitmix64(seed ^ (r * 2 + (mode == Mode::Adaptive ? 0 : 1)));
            sim.threads = threads;
            SimulationReport report = simulate(s, sim);
            double theory = 1.0 / closed_form_gap(cfg.family, mode, cfg.n, cfg.k).value();
            rows.push_back({cfg.state, mode, report.fitted_inverse_gap, report.fitted_stddev, theory});
        }
    }
    return rows;
}

}  // namespace qsv
