#include <doctest.h>

#include <cmath>

#include "qsv/simulate.hpp"

using namespace qsv;

TEST_SUITE_BEGIN("simulate");

namespace {

// Upper chi-square quantile via the Wilson-Hilferty approximation.
double chi2_quantile(double df, double z) {
    double a = 2.0 / (9.0 * df);
    double c = 1.0 - a + z * std::sqrt(a);
    return df * c * c * c;
}

TestOperator rank_one(const Ket& v) {
    TestOperator op(v.n(), true);
    for (const auto& [r, ar] : v.amplitudes())
        for (const auto& [c, ac] : v.amplitudes()) op.add(r, c, ar * std::conj(ac));
    return op;
}

}  // namespace

TEST_CASE("worst-case noise vectors") {
    Strategy w4 = assemble_w_strategy(4, Mode::Adaptive);
    Ket tau = worst_case_noise(w4);
    Ket expected = normalize(singlet_pair_state(0, 1, dicke_state(2, 0)));
    CHECK(add_scaled(tau, -1.0, expected).norm() < 1e-12);

    // tau is an eigenvector at the second eigenvalue.
    SpectralReport report = spectral_gap(w4);
    Ket residual = add_scaled(w4.op().apply(tau), -report.lambda2, tau);
    CHECK(residual.norm() < 1e-10);

    // Same construction for the nonadaptive Dicke strategy.
    Strategy d52 = assemble_dicke_strategy(5, 2, Mode::Nonadaptive);
    Ket tau_d = worst_case_noise(d52);
    SpectralReport report_d = spectral_gap(d52);
    CHECK(add_scaled(d52.op().apply(tau_d), -report_d.lambda2, tau_d).norm() < 1e-10);
    CHECK(std::abs(inner(d52.target(), tau_d)) < 1e-12);

    // W3: the second eigenspace is not the singlet-pair span; the
    // eigensolver vector is used and must still be a valid eigenvector.
    Strategy w3 = assemble_w_strategy(3, Mode::Adaptive);
    Ket tau3 = worst_case_noise(w3);
    SpectralReport r3 = spectral_gap(w3);
    CHECK(add_scaled(w3.op().apply(tau3), -r3.lambda2, tau3).norm() < 1e-10);
    CHECK(std::abs(inner(w3.target(), tau3)) < 1e-10);

    // Rank-one global strategy has no second eigenspace.
    Ket w = w_state(3);
    std::vector<WeightedTest> tests;
    tests.push_back({1.0, rank_one(w), std::nullopt, "global"});
    Strategy global(w, std::move(tests), "global");
    CHECK_THROWS_AS(worst_case_noise(global), std::domain_error);
}

TEST_CASE("noisy inputs") {
    Strategy s = assemble_dicke_strategy(4, 2, Mode::Adaptive);
    for (double eps : {0.0, 0.1, 0.37, 1.0}) {
        NoisyInput input = make_noisy_input(s, eps);
        CHECK(std::abs(input.psi_prime.norm() - 1.0) < 1e-12);
        double overlap = std::norm(inner(input.target, input.psi_prime));
        CHECK(overlap == doctest::Approx(1.0 - eps).epsilon(1e-10));
    }
    CHECK_THROWS_AS(make_noisy_input(s, 1.5), std::domain_error);

    // The worst-case input passes the full strategy with probability
    // exactly 1 - nu * eps.
    SpectralReport report = spectral_gap(s);
    for (double eps : {0.1, 0.3}) {
        NoisyInput input = make_noisy_input(s, eps);
        double p = s.op().expectation(input.psi_prime).real();
        CHECK(p == doctest::Approx(1.0 - report.nu * eps).epsilon(1e-11));
    }
}

TEST_CASE("single trials") {
    Strategy s = assemble_w_strategy(4, Mode::Adaptive);

    // Target-like input hits the cap and is flagged.
    Rng rng(42);
    TrialResult capped = run_protocol_once(s, s.target(), rng, SampleMode::Bernoulli, 5000);
    CHECK(capped.capped);
    CHECK(capped.passes == 5000);

    // A state outside every branch predicate fails immediately.
    Strategy s5 = assemble_w_strategy(5, Mode::Adaptive);
    Ket ones = Ket::basis(5, 0b11111);
    for (int i = 0; i < 20; ++i) {
        TrialResult t = run_protocol_once(s5, ones, rng, SampleMode::Procedure);
        CHECK(t.passes == 0);
    }

    // Mean pass count matches the geometric identity p/(1-p) at 5 sigma.
    NoisyInput input = make_noisy_input(s, 0.3);
    double p = s.op().expectation(input.psi_prime).real();
    ProtocolSampler sampler(s, input.psi_prime, SampleMode::Bernoulli);
    const int kTrials = 10000;
    double sum = 0.0;
    for (int i = 0; i < kTrials; ++i) {
        Rng r = derive_stream(7, 0, i);
        sum += static_cast<double>(sampler.run_once(r).passes);
    }
    double mean = sum / kTrials;
    double expected = p / (1.0 - p);
    double sigma = std::sqrt(p) / (1.0 - p) / std::sqrt(static_cast<double>(kTrials));
    CHECK(std::abs(mean - expected) < 5.0 * sigma);
}

TEST_CASE("bernoulli and procedure samplers agree") {
    Strategy s = assemble_dicke_strategy(4, 2, Mode::Adaptive);
    NoisyInput input = make_noisy_input(s, 0.4);
    double p = s.op().expectation(input.psi_prime).real();

    const int kSamples = 20000;
    int pass_b = 0, pass_p = 0;
    ProtocolSampler bernoulli(s, input.psi_prime, SampleMode::Bernoulli);
    ProtocolSampler procedure(s, input.psi_prime, SampleMode::Procedure);
    for (int i = 0; i < kSamples; ++i) {
        Rng r1 = derive_stream(11, 1, i);
        Rng r2 = derive_stream(11, 2, i);
        pass_b += bernoulli.run_once(r1).passes > 0 ? 1 : 0;
        pass_p += procedure.run_once(r2).passes > 0 ? 1 : 0;
    }
    double se = std::sqrt(p * (1.0 - p) / kSamples);
    CHECK(std::abs(pass_b / double(kSamples) - p) < 5.0 * se + 1e-4);
    CHECK(std::abs(pass_p / double(kSamples) - p) < 5.0 * se + 1e-4);
}

TEST_CASE("pass counts are geometric") {
    Strategy s = assemble_w_strategy(4, Mode::Adaptive);
    NoisyInput input = make_noisy_input(s, 0.3);
    double p = s.op().expectation(input.psi_prime).real();  // 0.9

    const int kTrials = 20000;
    std::vector<std::uint64_t> counts;
    ProtocolSampler sampler(s, input.psi_prime, SampleMode::Bernoulli);
    for (int i = 0; i < kTrials; ++i) {
        Rng r = derive_stream(23, 0, i);
        counts.push_back(sampler.run_once(r).passes);
    }

    // Greedy binning with expected count >= 10 per bin.
    std::vector<double> pmf;
    double tail = 1.0;
    for (int m = 0; m < 2000; ++m) {
        double prob = std::pow(p, m) * (1.0 - p);
        pmf.push_back(prob);
        tail -= prob;
        if (tail < 10.0 / kTrials) break;
    }
    std::vector<std::pair<std::uint64_t, double>> bins;  // (upper bound, prob)
    double acc = 0.0;
    for (std::size_t m = 0; m < pmf.size(); ++m) {
        acc += pmf[m];
        if (acc * kTrials >= 10.0) {
            bins.emplace_back(m, acc);
            acc = 0.0;
        }
    }
    bins.emplace_back(UINT64_MAX, acc + tail);

    std::vector<double> observed(bins.size(), 0.0);
    for (std::uint64_t c : counts) {
        for (std::size_t b = 0; b < bins.size(); ++b) {
            if (c <= bins[b].first) {
                observed[b] += 1.0;
                break;
            }
        }
    }
    double chi2 = 0.0;
    for (std::size_t b = 0; b < bins.size(); ++b) {
        double expected = bins[b].second * kTrials;
        chi2 += (observed[b] - expected) * (observed[b] - expected) / expected;
    }
    // Significance 0.001 (z = 3.0902).
    CHECK(chi2 < chi2_quantile(static_cast<double>(bins.size() - 1), 3.0902));
}

TEST_CASE("simulation reports") {
    Strategy s = assemble_w_strategy(3, Mode::Adaptive);
    SimulationConfig cfg;
    cfg.eps_grid = {0.1, 0.2, 0.35, 0.5};
    cfg.deltas = {0.01, 0.05, 0.1, 0.2};
    cfg.trials = 2000;
    cfg.seed = 99;

    SimulationReport report = simulate(s, cfg);
    CHECK(report.samples.size() == 4);
    CHECK(report.samples[0].size() == 2000);
    CHECK_FALSE(report.overflow);

    // Thresholds shrink as delta grows.
    for (std::size_t e = 0; e < report.eps_grid.size(); ++e)
        for (std::size_t d = 1; d < report.deltas.size(); ++d)
            CHECK(report.thresholds[e][d] <= report.thresholds[e][d - 1]);

    // Determinism: same seed, same report; threads cannot change it.
    SimulationReport again = simulate(s, cfg);
    CHECK(again.samples == report.samples);
    CHECK(again.thresholds == report.thresholds);
    SimulationConfig cfg1 = cfg;
    cfg1.threads = 1;
    SimulationConfig cfg4 = cfg;
    cfg4.threads = 4;
    CHECK(simulate(s, cfg1).samples == simulate(s, cfg4).samples);

    // Different seeds give different samples.
    SimulationConfig other = cfg;
    other.seed = 100;
    CHECK(simulate(s, other).samples != report.samples);

    // Validation.
    SimulationConfig bad = cfg;
    bad.trials = 50;
    CHECK_THROWS_AS(simulate(s, bad), std::domain_error);
    bad = cfg;
    bad.deltas = {0.0001};
    CHECK_THROWS_AS(simulate(s, bad), std::domain_error);
}

TEST_CASE("thresholds track the required-test formula") {
    // Spot checks at M = 10^4: the simulated order statistic stays within
    // 15% of the exact sample-count formula.
    struct Config { Family family; int n, k; Mode mode; };
    std::vector<Config> configs{{Family::W, 3, 1, Mode::Adaptive},
                                {Family::W, 5, 1, Mode::Nonadaptive},
                                {Family::Dicke, 4, 2, Mode::Adaptive}};
    for (const auto& c : configs) {
        Strategy s = assemble_strategy(c.family, c.mode, c.n, c.k);
        double nu = closed_form_gap(c.family, c.mode, c.n, c.k).value();
        SimulationConfig cfg;
        cfg.eps_grid = {0.05, 0.1, 0.25, 0.5};
        cfg.deltas = {0.01, 0.05, 0.2};
        cfg.trials = 10000;
        cfg.seed = 4242;
        SimulationReport report = simulate(s, cfg);
        for (std::size_t e = 0; e < cfg.eps_grid.size(); ++e) {
            for (std::size_t d = 0; d < cfg.deltas.size(); ++d) {
                double exact = static_cast<double>(
                    required_tests(nu, cfg.eps_grid[e], cfg.deltas[d]).exact);
                double simulated = static_cast<double>(report.thresholds[e][d]);
                // Two-test floor: the order statistic sits near the floor of
                // ln(delta)/ln(p) while the count formula takes the ceiling.
                CHECK(std::abs(simulated - exact) <= std::max(0.15 * exact, 2.0));
            }
        }
    }
}

TEST_CASE("fitting the inverse gap") {
    // Synthetic thresholds from the exact proportionality recover the slope.
    SimulationReport synthetic;
    synthetic.eps_grid = {0.05, 0.1, 0.2, 0.4};
    synthetic.deltas = {0.01, 0.05, 0.1, 0.2};
    synthetic.trials = 1000;
    const double inverse_gap = 7.0;
    synthetic.thresholds.resize(synthetic.eps_grid.size());
    for (std::size_t e = 0; e < synthetic.eps_grid.size(); ++e) {
        for (double d : synthetic.deltas) {
            double value = inverse_gap * std::log(1.0 / d) / synthetic.eps_grid[e];
            synthetic.thresholds[e].push_back(static_cast<std::uint64_t>(std::llround(value)));
        }
    }
    auto [estimate, stddev] = fit_inverse_gap(synthetic);
    CHECK(estimate == doctest::Approx(inverse_gap).epsilon(5e-3));
    CHECK(stddev < 0.05);

    SimulationReport degenerate = synthetic;
    degenerate.eps_grid = {0.1};
    CHECK_THROWS_AS(fit_inverse_gap(degenerate), std::domain_error);

    // End to end on the smallest W state.
    Strategy w3 = assemble_w_strategy(3, Mode::Adaptive);
    SimulationConfig cfg;
    cfg.trials = 4000;
    cfg.seed = 5;
    cfg.eps_grid = {0.05, 0.08, 0.12, 0.2, 0.3, 0.5};
    cfg.deltas = {0.01, 0.05, 0.1, 0.15, 0.2};
    SimulationReport report = simulate(w3, cfg);
    CHECK(report.fitted_inverse_gap == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("table configuration") {
    auto configs = table_configs();
    CHECK(configs.size() == 14);
    CHECK(configs.front().state == "W3");
    CHECK(configs.back().state == "D8^4");
    int dicke_rows = 0;
    for (const auto& c : configs)
        if (c.family == Family::Dicke) ++dicke_rows;
    CHECK(dicke_rows == 8);

    // Theory columns: n - 1 adaptive, 2(n - 1) nonadaptive.
    CHECK(1.0 / closed_form_gap(Family::W, Mode::Adaptive, 6).value() == doctest::Approx(5.0));
    CHECK(1.0 / closed_form_gap(Family::Dicke, Mode::Nonadaptive, 8, 4).value() ==
          doctest::Approx(14.0));
}

TEST_SUITE_END();
