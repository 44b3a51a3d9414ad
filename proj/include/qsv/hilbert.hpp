#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <vector>

namespace qsv {

using cplx = std::complex<double>;

// Amplitudes below this magnitude are dropped after arithmetic so sparse maps
// do not accumulate numerical dust. Far below every verification tolerance.
inline constexpr double kAmplitudePrune = 1e-14;

// Exact binomial coefficient for 0 <= n <= 64. Returns 0 when k < 0 or k > n.
// Throws on out-of-range n instead of wrapping around.
std::uint64_t binom(int n, int k);

// Computational-basis label. Qubit q maps to bit q of `bits`; bit value 1 is
// measurement outcome "1" (Z eigenvalue -1, an excitation).
struct BasisState {
    std::uint64_t bits = 0;
    int n = 0;
    int weight = 0;

    BasisState() = default;
    BasisState(std::uint64_t bits_, int n_);
};

// Ascending enumeration of B_{n,k}, the n-bit labels of Hamming weight k,
// with rank/unrank lookups in both directions.
class WeightSector {
public:
    WeightSector(int n, int k);

    int n() const { return n_; }
    int k() const { return k_; }
    const std::vector<std::uint64_t>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }

    std::size_t rank(std::uint64_t label) const;
    std::uint64_t unrank(std::size_t r) const;

private:
    int n_ = 0, k_ = 0;
    std::vector<std::uint64_t> members_;
};

// Sparse complex state vector over n-qubit basis labels. Values are treated
// as immutable once built; the mutating calls exist for constructors only.
class Ket {
public:
    explicit Ket(int n);
    static Ket basis(int n, std::uint64_t label);

    int n() const { return n_; }
    const std::map<std::uint64_t, cplx>& amplitudes() const { return amps_; }
    cplx amplitude(std::uint64_t label) const;
    void set_amplitude(std::uint64_t label, cplx v);
    std::size_t support_size() const { return amps_.size(); }
    double norm() const;

private:
    int n_ = 0;
    std::map<std::uint64_t, cplx> amps_;
};

// Uniform superposition over B_{n,k} with amplitude 1/sqrt(C(n,k)).
Ket dicke_state(int n, int k);
// Single-excitation Dicke state.
Ket w_state(int n);

// (|1_i 0_j> - |0_i 1_j>)/sqrt(2) on qubits i and j, tensored with `rest`
// spread over the remaining qubit indices in ascending order.
Ket singlet_pair_state(int i, int j, const Ket& rest);

cplx inner(const Ket& a, const Ket& b);  // conjugate-linear in `a`
Ket normalize(const Ket& a);             // rejects zero vectors
Ket add_scaled(const Ket& a, cplx c, const Ket& b);  // a + c*b, not normalized
Ket scaled(const Ket& a, cplx c);

// Relabels qubits: qubit q of the input becomes qubit perm[q] of the output.
Ket permute_qubits(const Ket& a, const std::vector<int>& perm);

// X on every qubit, acting as the basis permutation label -> ~label.
std::uint64_t flip_all_bits(std::uint64_t label, int n);
Ket flip_all_qubits(const Ket& a);

// Scatter bits of a packed value into the given label positions / gather back.
std::uint64_t scatter_bits(std::uint64_t packed, const std::vector<int>& positions);
std::uint64_t gather_bits(std::uint64_t label, const std::vector<int>& positions);

}  // namespace qsv
