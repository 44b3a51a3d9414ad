#pragma once

#include <optional>
#include <string>

#include "qsv/operators.hpp"
#include "qsv/rational.hpp"

namespace qsv {

enum class Family { Bell3, Bell2, W, Dicke };
enum class Mode { Adaptive, Nonadaptive };

std::string family_name(Family f);
std::string mode_name(Mode m);

struct WeightedTest {
    double mu = 0.0;
    TestOperator op;
    std::optional<AdaptiveTest> tree;  // executable form, when available
    std::string name;
};

// Probability-weighted set of tests with a common target state. The cached
// verification operator is the mu-weighted sum of the test operators.
class Strategy {
public:
    Strategy(Ket target, std::vector<WeightedTest> tests, std::string name = "");

    const Ket& target() const { return target_; }
    const std::vector<WeightedTest>& tests() const { return tests_; }
    const TestOperator& op() const { return op_; }
    int n() const { return target_.n(); }
    const std::string& name() const { return name_; }

private:
    Ket target_;
    std::vector<WeightedTest> tests_;
    TestOperator op_;
    std::string name_;
};

Strategy assemble_bell3_strategy();
Strategy assemble_bell2_strategy();
Strategy assemble_w_strategy(int n, Mode mode);
Strategy assemble_dicke_strategy(int n, int k, Mode mode);
// Dispatcher used by the CLI; k is ignored for Bell and W families.
Strategy assemble_strategy(Family family, Mode mode, int n, int k);

// Exact symmetric eigensolve restricted to the operator's support labels.
// Eigenvalues ascending; zero_complement counts the basis labels outside the
// support, all of which carry eigenvalue 0.
struct EigenDecomposition {
    std::vector<double> values;
    std::vector<Ket> vectors;
    std::uint64_t support_dim = 0;
    std::uint64_t zero_complement = 0;
};
EigenDecomposition eigensolve_support(const TestOperator& op, std::size_t max_dim = 4096);

struct SpectralReport {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double nu = 0.0;             // 1 - lambda2
    std::uint64_t multiplicity2 = 0;
    std::vector<Ket> eigvecs2;   // basis of the lambda2 eigenspace in the support
    std::string method;          // "sector-block" or "dense"
    double max_eig_residual = 0.0;    // max ||Omega v - lambda2 v||
    double max_target_overlap = 0.0;  // max |<target|v>|
};
SpectralReport spectral_gap(const Strategy& s);

// Exact spectral gap from the closed forms. k is ignored except for Dicke.
Rational closed_form_gap(Family family, Mode mode, int n, int k = 0);

// Full closed-form spectrum of the adaptive W verification operator:
// (eigenvalue, multiplicity) pairs, multiplicities summing to 2^n.
std::vector<std::pair<Rational, std::uint64_t>> full_spectrum_w(int n);

// Adjacency spectrum of the Johnson graph J(n,k): eigenvalue (k-j)(n-k-j)-j
// with multiplicity C(n,j) - C(n,j-1) for j = 0..min(k, n-k).
std::vector<std::pair<std::int64_t, std::uint64_t>> johnson_spectrum(int n, int k);

// The two blocks of n(n-1) * Omega_D: M1 acts on the weight-k sector (shifted
// Johnson adjacency), M2 on the adjacent sectors k-1 and k+1.
TestOperator dicke_m1(int n, int k);
TestOperator dicke_m2(int n, int k);

// Closed-form top eigenpair of M2: value n(n+1)/2 + k(k-n), eigenvector a
// fixed superposition of the two adjacent Dicke states.
std::pair<std::int64_t, Ket> m2_top_eigen(int n, int k);

double worst_case_pass_probability(const Strategy& s, double eps);
double worst_case_pass_probability(double nu, double eps);

struct RequiredTests {
    std::uint64_t exact = 0;
    double approx = 0.0;
};
// Number of tests for infidelity eps and confidence 1-delta given gap nu.
RequiredTests required_tests(double nu, double eps, double delta);

struct EigenspaceReport {
    int pair_count = 0;
    int expected_dim = 0;
    int gram_rank = 0;
    double expectation = 0.0;          // <phi|Omega|phi>, common to all pairs
    double expectation_spread = 0.0;
    double max_rayleigh_residual = 0.0;
    double max_target_overlap = 0.0;
    bool ok = false;
};
// Checks that the singlet-pair vectors span the second eigenspace.
EigenspaceReport verify_second_eigenspace(const Strategy& s, Family family, int n, int k);

}  // namespace qsv
