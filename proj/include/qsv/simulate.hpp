#pragma once

#include "qsv/spectral.hpp"

namespace qsv {

// Worst-case noise vector: a deterministic unit vector in the eigenspace of
// the second largest eigenvalue, orthogonal to the target. For Dicke targets
// with n >= 4 this is the singlet-pair vector on qubits (1, 2).
Ket worst_case_noise(const Strategy& s);

struct NoisyInput {
    Ket target;
    Ket tau;
    Ket psi_prime;
    double eps = 0.0;
};
NoisyInput make_noisy_input(const Strategy& s, double eps);
NoisyInput make_noisy_input(const Strategy& s, const Ket& tau, double eps);

enum class SampleMode { Bernoulli, Procedure };

inline constexpr std::uint64_t kDefaultTrialCap = 10'000'000;

struct TrialResult {
    std::uint64_t passes = 0;
    bool capped = false;  // target-like input: every test kept passing
};

// Draws tests according to the strategy weights and counts passes until the
// first fail. Bernoulli mode samples each test from its exact pass
// probability; Procedure mode plays out every measurement outcome.
class ProtocolSampler {
public:
    ProtocolSampler(const Strategy& s, const Ket& input, SampleMode mode);

    TrialResult run_once(Rng& rng, std::uint64_t cap = kDefaultTrialCap) const;
    const std::vector<double>& pass_probabilities() const { return pass_prob_; }

private:
    const Strategy* strategy_;
    Ket input_;
    SampleMode mode_;
    std::vector<double> cdf_;
    std::vector<double> pass_prob_;
};

TrialResult run_protocol_once(const Strategy& s, const Ket& input, Rng& rng,
                              SampleMode mode = SampleMode::Bernoulli,
                              std::uint64_t cap = kDefaultTrialCap);

struct SimulationConfig {
    std::vector<double> eps_grid;   // empty: 40 log-spaced points in [0.02, 0.5]
    std::vector<double> deltas;     // empty: 100 evenly spaced in [0.01, 0.2]
    std::uint64_t trials = 10000;   // M
    std::uint64_t seed = 0;
    SampleMode mode = SampleMode::Bernoulli;
    std::uint64_t cap = kDefaultTrialCap;
    int threads = 0;                // 0: hardware concurrency
};

std::vector<double> default_eps_grid();
std::vector<double> default_delta_grid();

struct SimulationReport {
    std::string strategy;
    std::string sampling;  // "bernoulli" or "procedure"
    std::string noise;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::vector<double> eps_grid;
    std::vector<double> deltas;
    // samples[e][i]: passes before the first fail, trial i at eps_grid[e].
    std::vector<std::vector<std::uint32_t>> samples;
    // thresholds[e][d]: the floor(delta*M)-th largest sample.
    std::vector<std::vector<std::uint64_t>> thresholds;
    bool overflow = false;
    double fitted_inverse_gap = 0.0;
    double fitted_stddev = 0.0;
};

SimulationReport simulate(const Strategy& s, const SimulationConfig& cfg);

// Per-delta least-squares slope of N against (1/eps) ln(1/delta) through the
// origin; returns the mean and sample standard deviation across deltas.
std::pair<double, double> fit_inverse_gap(const SimulationReport& report);

struct TableConfig {
    std::string state;
    Family family = Family::W;
    int n = 0;
    int k = 0;
};
// The fourteen W and Dicke states of the simulated-verification table.
std::vector<TableConfig> table_configs();

struct TableRow {
    std::string state;
    Mode mode = Mode::Adaptive;
    double fitted = 0.0;
    double stddev = 0.0;
    double theory = 0.0;
};
std::vector<TableRow> run_table(std::uint64_t trials, std::uint64_t seed, int threads = 0);

}  // namespace qsv
