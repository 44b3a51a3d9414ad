#include "qsv/operators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qsv {

namespace {

constexpr double kEntryDrop = 1e-300;

// Eigenvector of a single-qubit Pauli for the given outcome, over the
// computational basis. Outcome 0 is the +1 eigenvalue.
std::array<cplx, 2> axis_eigenvector(Axis axis, int outcome) {
    const double s = 1.0 / std::sqrt(2.0);
    switch (axis) {
        case Axis::Z:
            return outcome == 0 ? std::array<cplx, 2>{1.0, 0.0} : std::array<cplx, 2>{0.0, 1.0};
        case Axis::X:
            return outcome == 0 ? std::array<cplx, 2>{s, s} : std::array<cplx, 2>{s, -s};
        case Axis::Y:
            return outcome == 0 ? std::array<cplx, 2>{s, cplx(0.0, 1.0) * s}
                                : std::array<cplx, 2>{s, cplx(0.0, -1.0) * s};
    }
    throw std::logic_error("axis_eigenvector: bad axis");
}

std::vector<int> other_qubits(int i, int j, int n) {
    std::vector<int> others;
    others.reserve(n - 2);
    for (int q = 0; q < n; ++q)
        if (q != i && q != j) others.push_back(q);
    return others;
}

std::uint64_t pair_code(int p, int i, int j) {
    return (static_cast<std::uint64_t>((p >> 1) & 1) << i) |
           (static_cast<std::uint64_t>(p & 1) << j);
}

void check_pair_indices(int i, int j, int n) {
    if (i == j) throw std::domain_error("pair indices collide");
    if (i < 0 || j < 0 || i >= n || j >= n) throw std::domain_error("pair index out of range");
}

}  // namespace

Axis axis_from_char(char c) {
    switch (c) {
        case 'X': return Axis::X;
        case 'Y': return Axis::Y;
        case 'Z': return Axis::Z;
    }
    throw std::domain_error("axis_from_char: expected X, Y or Z");
}

char axis_char(Axis a) {
    switch (a) {
        case Axis::X: return 'X';
        case Axis::Y: return 'Y';
        case Axis::Z: return 'Z';
    }
    return '?';
}

TestOperator::TestOperator(int n, bool is_projector) : n_(n), projector_(is_projector) {
    if (n < 0 || n > 62) throw std::domain_error("TestOperator: qubit count must be in [0, 62]");
}

void TestOperator::add(std::uint64_t row, std::uint64_t col, cplx v) {
    if (v == cplx(0.0)) return;
    cplx& slot = rows_[row][col];
    slot += v;
    if (std::abs(slot.real()) + std::abs(slot.imag()) < kEntryDrop) {
        rows_[row].erase(col);
        if (rows_[row].empty()) rows_.erase(row);
    }
}

cplx TestOperator::entry(std::uint64_t row, std::uint64_t col) const {
    auto rit = rows_.find(row);
    if (rit == rows_.end()) return 0.0;
    auto cit = rit->second.find(col);
    return cit == rit->second.end() ? cplx(0.0) : cit->second;
}

std::size_t TestOperator::nonzero_count() const {
    std::size_t count = 0;
    for (const auto& [row, cols] : rows_) count += cols.size();
    return count;
}

Ket TestOperator::apply(const Ket& v) const {
    if (v.n() != n_) throw std::domain_error("TestOperator::apply: qubit counts differ");
    Ket out(n_);
    for (const auto& [row, cols] : rows_) {
        cplx s = 0.0;
        for (const auto& [col, val] : cols) {
            cplx a = v.amplitude(col);
            if (a != cplx(0.0)) s += val * a;
        }
        if (s != cplx(0.0)) out.set_amplitude(row, s);
    }
    return out;
}

cplx TestOperator::expectation(const Ket& v) const {
    if (v.n() != n_) throw std::domain_error("TestOperator::expectation: qubit counts differ");
    cplx s = 0.0;
    for (const auto& [row, cols] : rows_) {
        cplx a = v.amplitude(row);
        if (a == cplx(0.0)) continue;
        cplx acc = 0.0;
        for (const auto& [col, val] : cols) {
            cplx b = v.amplitude(col);
            if (b != cplx(0.0)) acc += val * b;
        }
        s += std::conj(a) * acc;
    }
    return s;
}

void TestOperator::add_scaled(const TestOperator& other, cplx c) {
    if (other.n_ != n_) throw std::domain_error("TestOperator::add_scaled: qubit counts differ");
    for (const auto& [row, cols] : other.rows_)
        for (const auto& [col, val] : cols) add(row, col, c * val);
    projector_ = false;
}

TestOperator TestOperator::scaled(cplx c) const {
    TestOperator out(n_);
    for (const auto& [row, cols] : rows_)
        for (const auto& [col, val] : cols) out.add(row, col, c * val);
    return out;
}

TestOperator TestOperator::composed(const TestOperator& other) const {
    if (other.n_ != n_) throw std::domain_error("TestOperator::composed: qubit counts differ");
    TestOperator out(n_);
    for (const auto& [row, cols] : rows_) {
        for (const auto& [mid, a] : cols) {
            auto rit = other.rows_.find(mid);
            if (rit == other.rows_.end()) continue;
            for (const auto& [col, b] : rit->second) out.add(row, col, a * b);
        }
    }
    out.prune();
    return out;
}

double TestOperator::max_abs_diff(const TestOperator& other) const {
    TestOperator diff = *this;
    diff.add_scaled(other, -1.0);
    double m = 0.0;
    for (const auto& [row, cols] : diff.rows_)
        for (const auto& [col, val] : cols) m = std::max(m, std::abs(val));
    return m;
}

double TestOperator::hermiticity_defect() const {
    double m = 0.0;
    for (const auto& [row, cols] : rows_)
        for (const auto& [col, val] : cols)
            m = std::max(m, std::abs(val - std::conj(entry(col, row))));
    return m;
}

std::vector<std::uint64_t> TestOperator::support_labels() const {
    std::set<std::uint64_t> labels;
    for (const auto& [row, cols] : rows_) {
        labels.insert(row);
        for (const auto& [col, val] : cols) labels.insert(col);
    }
    return {labels.begin(), labels.end()};
}

void TestOperator::prune(double threshold) {
    for (auto rit = rows_.begin(); rit != rows_.end();) {
        for (auto cit = rit->second.begin(); cit != rit->second.end();) {
            if (std::abs(cit->second) <= threshold)
                cit = rit->second.erase(cit);
            else
                ++cit;
        }
        if (rit->second.empty())
            rit = rows_.erase(rit);
        else
            ++rit;
    }
}

TestOperator pauli_projector(Axis axis, Sign sign, int qubit, int n) {
    if (qubit < 0 || qubit >= n) throw std::domain_error("pauli_projector: qubit out of range");
    if (n > kMaxDenseQubits)
        throw std::runtime_error("pauli_projector: too many qubits to materialize");
    int outcome = sign == Sign::Plus ? 0 : 1;
    auto v = axis_eigenvector(axis, outcome);
    TestOperator op(n, true);
    std::uint64_t bit = 1ULL << qubit;
    for (std::uint64_t u = 0; u < (1ULL << n); ++u) {
        if (u & bit) continue;
        // 2x2 block { |v><v| } on labels (u, u|bit).
        op.add(u, u, v[0] * std::conj(v[0]));
        op.add(u, u | bit, v[0] * std::conj(v[1]));
        op.add(u | bit, u, v[1] * std::conj(v[0]));
        op.add(u | bit, u | bit, v[1] * std::conj(v[1]));
    }
    op.prune();
    op.set_projector(true);
    return op;
}

std::array<cplx, 16> pair_accept_matrix(Axis ai, Axis aj, const PairOutcomeSet& accept) {
    std::array<cplx, 16> m{};
    for (int oi = 0; oi < 2; ++oi) {
        for (int oj = 0; oj < 2; ++oj) {
            if (!accept.accept[oi * 2 + oj]) continue;
            auto vi = axis_eigenvector(ai, oi);
            auto vj = axis_eigenvector(aj, oj);
            for (int r = 0; r < 4; ++r) {
                cplx br = vi[(r >> 1) & 1] * vj[r & 1];
                for (int c = 0; c < 4; ++c) {
                    cplx bc = vi[(c >> 1) & 1] * vj[c & 1];
                    m[r * 4 + c] += br * std::conj(bc);
                }
            }
        }
    }
    return m;
}

PairOutcomeSet PairOutcomeSet::none() { return {}; }
PairOutcomeSet PairOutcomeSet::all() { return {{true, true, true, true}}; }
PairOutcomeSet PairOutcomeSet::coincide() { return {{true, false, false, true}}; }
PairOutcomeSet PairOutcomeSet::differ() { return {{false, true, true, false}}; }
PairOutcomeSet PairOutcomeSet::only(int oi, int oj) {
    PairOutcomeSet s;
    s.accept[oi * 2 + oj] = true;
    return s;
}

namespace {

void embed_pair_matrix(TestOperator& op, int i, int j, const std::array<cplx, 16>& m,
                       std::uint64_t rest_label) {
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            if (m[r * 4 + c] == cplx(0.0)) continue;
            op.add(rest_label | pair_code(r, i, j), rest_label | pair_code(c, i, j), m[r * 4 + c]);
        }
    }
}

}  // namespace

TestOperator pair_projector(PairKind kind, int i, int j, int n) {
    check_pair_indices(i, j, n);
    if (n > kMaxDenseQubits)
        throw std::runtime_error("pair_projector: too many qubits to materialize");
    std::array<cplx, 16> m{};
    switch (kind) {
        case PairKind::XXPlus: m = pair_accept_matrix(Axis::X, Axis::X, PairOutcomeSet::coincide()); break;
        case PairKind::XXMinus: m = pair_accept_matrix(Axis::X, Axis::X, PairOutcomeSet::differ()); break;
        // Built from the one-sided projectors so the complex phases of the Y
        // eigenvectors appear explicitly; the sum comes out real.
        case PairKind::YYPlus: m = pair_accept_matrix(Axis::Y, Axis::Y, PairOutcomeSet::coincide()); break;
        case PairKind::YYMinus: m = pair_accept_matrix(Axis::Y, Axis::Y, PairOutcomeSet::differ()); break;
        case PairKind::ZZPlus: m = pair_accept_matrix(Axis::Z, Axis::Z, PairOutcomeSet::coincide()); break;
        case PairKind::ZZMinus: m = pair_accept_matrix(Axis::Z, Axis::Z, PairOutcomeSet::differ()); break;
        case PairKind::Singlet: {
            // (|1_i 0_j> - |0_i 1_j>)/sqrt(2), indices (bit_i<<1)|bit_j.
            std::array<cplx, 4> v{0.0, -1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0};
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c) m[r * 4 + c] = v[r] * std::conj(v[c]);
            break;
        }
    }
    TestOperator op(n, true);
    std::vector<int> others = other_qubits(i, j, n);
    for (std::uint64_t rest = 0; rest < (1ULL << (n - 2)); ++rest)
        embed_pair_matrix(op, i, j, m, scatter_bits(rest, others));
    op.prune();
    op.set_projector(true);
    return op;
}

TestOperator weight_projector(int i, int j, int k, int n) {
    check_pair_indices(i, j, n);
    TestOperator op(n, true);
    if (k < 0 || k > n - 2) return op;  // empty outcome class
    std::vector<int> others = other_qubits(i, j, n);
    WeightSector sector(n - 2, k);
    for (std::uint64_t u : sector.members()) {
        std::uint64_t base = scatter_bits(u, others);
        for (int p = 0; p < 4; ++p) {
            std::uint64_t label = base | pair_code(p, i, j);
            op.add(label, label, 1.0);
        }
    }
    return op;
}

TestOperator weight_sector_projector(int k, int n) {
    TestOperator op(n, true);
    if (k < 0 || k > n) return op;
    WeightSector sector(n, k);
    for (std::uint64_t u : sector.members()) op.add(u, u, 1.0);
    return op;
}

TestOperator AdaptiveTest::to_operator() const {
    check_disjoint_branches();
    TestOperator op(n, true);
    std::vector<int> others = other_qubits(qi, qj, n);
    for (const auto& branch : branches) {
        Axis ai = axis_from_char(branch.setting.at(0));
        Axis aj = axis_from_char(branch.setting.at(1));
        for (const auto& term : branch.terms) {
            if (term.first_weight < 0 || term.first_weight > n - 2) continue;
            if (term.accept.is_none()) continue;
            auto m = pair_accept_matrix(ai, aj, term.accept);
            WeightSector sector(n - 2, term.first_weight);
            for (std::uint64_t u : sector.members())
                embed_pair_matrix(op, qi, qj, m, scatter_bits(u, others));
        }
    }
    op.prune();
    op.set_projector(true);
    return op;
}

std::vector<int> AdaptiveTest::claimed_weights() const {
    std::set<int> w;
    for (const auto& branch : branches)
        for (const auto& term : branch.terms) w.insert(term.first_weight);
    return {w.begin(), w.end()};
}

void AdaptiveTest::check_disjoint_branches() const {
    std::set<int> seen;
    for (const auto& branch : branches) {
        for (const auto& term : branch.terms) {
            if (!seen.insert(term.first_weight).second)
                throw std::domain_error("AdaptiveTest: overlapping first-stage outcome classes");
        }
    }
}

AdaptiveTest make_adaptive_test(int i, int j, int n, std::vector<Branch> branches) {
    check_pair_indices(i, j, n);
    AdaptiveTest t;
    t.n = n;
    t.qi = i;
    t.qj = j;
    t.first_stage = other_qubits(i, j, n);
    t.branches = std::move(branches);
    t.check_disjoint_branches();
    return t;
}

AdaptiveTest dicke_adaptive_test(int i, int j, int k, int n) {
    if (n < 3) throw std::domain_error("dicke_adaptive_test: need at least 3 qubits");
    if (k < 1 || k > n - 1) throw std::domain_error("dicke_adaptive_test: k out of range");
    std::vector<Branch> branches;
    Branch zz;
    zz.setting = "ZZ";
    if (k <= n - 2) zz.terms.push_back({k, PairOutcomeSet::only(0, 0)});
    if (k - 2 >= 0) zz.terms.push_back({k - 2, PairOutcomeSet::only(1, 1)});
    // The two ZZ outcome classes are distinct branches of the two-step test;
    // they merely share the measurement setting.
    for (const auto& term : zz.terms) branches.push_back({"ZZ", {term}});
    branches.push_back({"XX", {{k - 1, PairOutcomeSet::coincide()}}});
    return make_adaptive_test(i, j, n, std::move(branches));
}

AdaptiveTest w_adaptive_test(int i, int j, int n) {
    return dicke_adaptive_test(i, j, 1, n);
}

AdaptiveTest z_basis_test_tree(int i, int j, int k, int n) {
    if (k < 1 || k > n - 1) throw std::domain_error("z_basis_test_tree: k out of range");
    Branch b;
    b.setting = "ZZ";
    if (k <= n - 2) b.terms.push_back({k, PairOutcomeSet::only(0, 0)});
    if (k - 2 >= 0) b.terms.push_back({k - 2, PairOutcomeSet::only(1, 1)});
    b.terms.push_back({k - 1, PairOutcomeSet::differ()});
    return make_adaptive_test(i, j, n, {b});
}

AdaptiveTest xx_basis_test_tree(int i, int j, int k, int n) {
    if (k < 1 || k > n - 1) throw std::domain_error("xx_basis_test_tree: k out of range");
    Branch b;
    b.setting = "XX";
    b.terms.push_back({k - 1, PairOutcomeSet::coincide()});
    if (k <= n - 2) b.terms.push_back({k, PairOutcomeSet::all()});
    if (k - 2 >= 0) b.terms.push_back({k - 2, PairOutcomeSet::all()});
    return make_adaptive_test(i, j, n, {b});
}

std::pair<TestOperator, TestOperator> w_nonadaptive_tests(int i, int j, int n) {
    if (n < 3) throw std::domain_error("w_nonadaptive_tests: need at least 3 qubits");
    return {z_basis_test_tree(i, j, 1, n).to_operator(),
            xx_basis_test_tree(i, j, 1, n).to_operator()};
}

std::pair<TestOperator, TestOperator> dicke_nonadaptive_tests(int i, int j, int k, int n) {
    if (n < 3) throw std::domain_error("dicke_nonadaptive_tests: need at least 3 qubits");
    return {z_basis_test_tree(i, j, k, n).to_operator(),
            xx_basis_test_tree(i, j, k, n).to_operator()};
}

TestOperator flip_all_qubits(const TestOperator& op) {
    TestOperator out(op.n(), op.is_projector());
    for (const auto& [row, cols] : op.rows())
        for (const auto& [col, val] : cols)
            out.add(flip_all_bits(row, op.n()), flip_all_bits(col, op.n()), val);
    return out;
}

AdaptiveTest flip_all_qubits(const AdaptiveTest& t) {
    AdaptiveTest out = t;
    for (auto& branch : out.branches) {
        Axis ai = axis_from_char(branch.setting.at(0));
        Axis aj = axis_from_char(branch.setting.at(1));
        // X conjugation flips Z and Y outcomes and leaves X outcomes alone.
        bool flip_i = ai != Axis::X;
        bool flip_j = aj != Axis::X;
        for (auto& term : branch.terms) {
            term.first_weight = (t.n - 2) - term.first_weight;
            PairOutcomeSet mapped;
            for (int oi = 0; oi < 2; ++oi)
                for (int oj = 0; oj < 2; ++oj) {
                    int ni = flip_i ? 1 - oi : oi;
                    int nj = flip_j ? 1 - oj : oj;
                    mapped.accept[ni * 2 + nj] = term.accept.accept[oi * 2 + oj];
                }
            term.accept = mapped;
        }
    }
    return out;
}

namespace {

Ket project_single_qubit(const Ket& state, int qubit, Axis axis, int outcome) {
    auto v = axis_eigenvector(axis, outcome);
    std::uint64_t bit = 1ULL << qubit;
    Ket out(state.n());
    const auto& amps = state.amplitudes();
    for (const auto& [label, a] : amps) {
        std::uint64_t u0 = label & ~bit;
        bool handle_here = (label == u0) || (amps.find(u0) == amps.end());
        if (!handle_here) continue;
        cplx a0 = state.amplitude(u0);
        cplx a1 = state.amplitude(u0 | bit);
        cplx c = std::conj(v[0]) * a0 + std::conj(v[1]) * a1;
        if (c == cplx(0.0)) continue;
        out.set_amplitude(u0, v[0] * c);
        out.set_amplitude(u0 | bit, v[1] * c);
    }
    return out;
}

}  // namespace

int measure_qubit(Ket& state, int qubit, Axis axis, Rng& rng) {
    Ket proj0 = project_single_qubit(state, qubit, axis, 0);
    double p0 = proj0.norm();
    p0 = std::min(1.0, p0 * p0);
    // Deterministic outcomes must never sample the zero-probability side.
    if (p0 > 1.0 - 1e-12) p0 = 1.0;
    if (p0 < 1e-12) p0 = 0.0;
    int outcome = rng.uniform() < p0 ? 0 : 1;
    Ket chosen = outcome == 0 ? std::move(proj0) : project_single_qubit(state, qubit, axis, 1);
    state = normalize(chosen);
    return outcome;
}

ProcedureResult execute_branch_procedure(const AdaptiveTest& test, const Ket& state, Rng& rng) {
    if (state.n() != test.n)
        throw std::domain_error("execute_branch_procedure: qubit counts differ");
    ProcedureResult result;
    Ket working = state;
    int weight = 0;
    for (int q : test.first_stage) {
        int o = measure_qubit(working, q, Axis::Z, rng);
        result.transcript.push_back({q, 'Z', o});
        weight += o;
    }
    for (std::size_t b = 0; b < test.branches.size(); ++b) {
        const Branch& branch = test.branches[b];
        const BranchTerm* term = nullptr;
        for (const auto& t : branch.terms)
            if (t.first_weight == weight) { term = &t; break; }
        if (!term) continue;
        result.branch_index = static_cast<int>(b);
        Axis ai = axis_from_char(branch.setting.at(0));
        Axis aj = axis_from_char(branch.setting.at(1));
        int oi = measure_qubit(working, test.qi, ai, rng);
        result.transcript.push_back({test.qi, branch.setting.at(0), oi});
        int oj = measure_qubit(working, test.qj, aj, rng);
        result.transcript.push_back({test.qj, branch.setting.at(1), oj});
        result.pass = term->accept.accept[oi * 2 + oj];
        return result;
    }
    // No branch covers this first-stage outcome: announce fail.
    result.pass = false;
    return result;
}

}  // namespace qsv
