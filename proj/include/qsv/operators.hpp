#pragma once

#include <array>
#include <optional>
#include <string>

#include "qsv/hilbert.hpp"
#include "qsv/rng.hpp"

namespace qsv {

enum class Axis { X, Y, Z };
enum class Sign { Plus, Minus };

Axis axis_from_char(char c);
char axis_char(Axis a);

// Hermitian operator on n qubits stored as a sparse matrix keyed by
// (row label, column label). Both triangles are stored explicitly.
class TestOperator {
public:
    using RowMap = std::map<std::uint64_t, cplx>;

    TestOperator() = default;
    explicit TestOperator(int n, bool is_projector = false);

    int n() const { return n_; }
    bool is_projector() const { return projector_; }
    void set_projector(bool p) { projector_ = p; }

    void add(std::uint64_t row, std::uint64_t col, cplx v);
    cplx entry(std::uint64_t row, std::uint64_t col) const;
    const std::map<std::uint64_t, RowMap>& rows() const { return rows_; }
    std::size_t nonzero_count() const;
    bool empty() const { return rows_.empty(); }

    Ket apply(const Ket& v) const;
    cplx expectation(const Ket& v) const;  // <v|Omega|v>

    void add_scaled(const TestOperator& other, cplx c);
    TestOperator scaled(cplx c) const;
    TestOperator composed(const TestOperator& other) const;  // this * other

    double max_abs_diff(const TestOperator& other) const;
    double hermiticity_defect() const;
    std::vector<std::uint64_t> support_labels() const;
    void prune(double threshold = kAmplitudePrune);

private:
    int n_ = 0;
    bool projector_ = false;
    std::map<std::uint64_t, RowMap> rows_;
};

// Resource guard: full-space projectors materialize O(2^n) entries.
inline constexpr int kMaxDenseQubits = 16;

// Projector onto the +-1 eigenspace of a single-qubit Pauli, tensored with
// identity elsewhere. Sign::Plus fixes outcome 0 (Z eigenvalue +1).
TestOperator pauli_projector(Axis axis, Sign sign, int qubit, int n);

enum class PairKind { XXPlus, XXMinus, YYPlus, YYMinus, ZZPlus, ZZMinus, Singlet };

// Projector onto the indicated eigenspace of a two-qubit Pauli product on
// qubits i and j (or the singlet projector), identity elsewhere.
TestOperator pair_projector(PairKind kind, int i, int j, int n);

// Diagonal projector onto labels whose restriction to the qubits other than
// i and j has Hamming weight k; identity factor on i and j. Zero operator
// when k is outside [0, n-2].
TestOperator weight_projector(int i, int j, int k, int n);

// Diagonal projector onto span B_{n,k}. Zero when k is outside [0, n].
TestOperator weight_sector_projector(int k, int n);

// Accepted second-stage outcome pairs, indexed by (outcome_i << 1) | outcome_j
// in the measured basis.
struct PairOutcomeSet {
    std::array<bool, 4> accept{};

    static PairOutcomeSet none();
    static PairOutcomeSet all();
    static PairOutcomeSet coincide();      // (0,0) and (1,1)
    static PairOutcomeSet differ();        // (0,1) and (1,0)
    static PairOutcomeSet only(int oi, int oj);

    bool is_all() const { return accept[0] && accept[1] && accept[2] && accept[3]; }
    bool is_none() const { return !(accept[0] || accept[1] || accept[2] || accept[3]); }
    bool operator==(const PairOutcomeSet&) const = default;
};

// One first-stage outcome class inside a branch: the excitation count seen on
// the other qubits and the outcomes accepted at the second stage.
struct BranchTerm {
    int first_weight = 0;
    PairOutcomeSet accept;
};

// A branch of a two-step test: a second-stage measurement setting (one axis
// character per pair qubit, i then j) and its outcome classes.
struct Branch {
    std::string setting;
    std::vector<BranchTerm> terms;
};

// Two-step test: Z measurements on every qubit except (qi, qj) select a
// branch by excitation count; the branch then fixes the pair measurement.
struct AdaptiveTest {
    int n = 0;
    int qi = 0, qj = 0;
    std::vector<int> first_stage;  // the other qubits, ascending
    std::vector<Branch> branches;

    TestOperator to_operator() const;
    // All first-stage weights claimed by any branch, ascending.
    std::vector<int> claimed_weights() const;
    // Throws if two branches claim the same first-stage weight.
    void check_disjoint_branches() const;
};

AdaptiveTest make_adaptive_test(int i, int j, int n, std::vector<Branch> branches);

// Two-step test fixing |D_n^k>: Z-outcome weight k or k-2 sends the pair to a
// ZZ measurement, weight k-1 to an XX measurement. k = 1 degenerates to the
// W-state test; k = n-1 is its qubit-flipped image.
AdaptiveTest dicke_adaptive_test(int i, int j, int k, int n);
AdaptiveTest w_adaptive_test(int i, int j, int n);

// Single-setting counterparts. The all-Z test passes exactly on total
// excitation count k; the X-pair test checks outcome coincidence only when
// the other qubits show k-1 excitations.
AdaptiveTest z_basis_test_tree(int i, int j, int k, int n);
AdaptiveTest xx_basis_test_tree(int i, int j, int k, int n);

std::pair<TestOperator, TestOperator> w_nonadaptive_tests(int i, int j, int n);
std::pair<TestOperator, TestOperator> dicke_nonadaptive_tests(int i, int j, int k, int n);

// 4x4 matrix (row-major, index (bit_i<<1)|bit_j) of the projector that sums
// the accepted outcome projectors of a pair measurement.
std::array<cplx, 16> pair_accept_matrix(Axis ai, Axis aj, const PairOutcomeSet& accept);

// Conjugation by X on every qubit.
TestOperator flip_all_qubits(const TestOperator& op);
AdaptiveTest flip_all_qubits(const AdaptiveTest& t);

struct MeasurementRecord {
    int qubit = 0;
    char axis = 'Z';
    int outcome = 0;
};

struct ProcedureResult {
    bool pass = false;
    int branch_index = -1;  // -1: no branch matched the first stage
    std::vector<MeasurementRecord> transcript;
};

// Projectively measures one qubit, collapsing the state in place.
// Outcome 0 corresponds to eigenvalue +1 in the chosen axis.
int measure_qubit(Ket& state, int qubit, Axis axis, Rng& rng);

// Runs one two-step test on a copy of `state`, sampling every measurement
// from the Born rule. The pass probability over the stream equals
// <state|Omega|state> for the test's operator form.
ProcedureResult execute_branch_procedure(const AdaptiveTest& test, const Ket& state, Rng& rng);

}  // namespace qsv
