#include "qsv/hilbert.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qsv {

std::uint64_t binom(int n, int k) {
    if (n < 0 || n > 64) throw std::domain_error("binom: n must be in [0, 64]");
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (r > std::numeric_limits<std::uint64_t>::max())
            throw std::overflow_error("binom: result exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(r);
}

BasisState::BasisState(std::uint64_t bits_, int n_) : bits(bits_), n(n_) {
    if (n_ < 0 || n_ > 64) throw std::domain_error("BasisState: bad qubit count");
    if (n_ < 64 && bits_ >> n_) throw std::domain_error("BasisState: label out of range");
    weight = std::popcount(bits_);
}

WeightSector::WeightSector(int n, int k) : n_(n), k_(k) {
    if (n < 0 || n > 64) throw std::domain_error("WeightSector: bad n");
    if (k < 0 || k > n) throw std::domain_error("WeightSector: bad k");
    std::uint64_t count = binom(n, k);
    if (count > 10'000'000ULL) throw std::runtime_error("WeightSector: sector too large to enumerate");
    members_.reserve(count);
    if (k == 0) {
        members_.push_back(0);
        return;
    }
    std::uint64_t v = (k == 64) ? ~0ULL : ((1ULL << k) - 1);
    std::uint64_t limit = (n == 64) ? ~0ULL : ((1ULL << n) - 1);
    while (true) {
        members_.push_back(v);
        if (members_.size() == count) break;
        // Gosper's hack: next label with the same popcount.
        std::uint64_t c = v & -v;
        std::uint64_t r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
        if (v > limit) break;
    }
}

std::size_t WeightSector::rank(std::uint64_t label) const {
    auto it = std::lower_bound(members_.begin(), members_.end(), label);
    if (it == members_.end() || *it != label)
        throw std::domain_error("WeightSector::rank: label not in sector");
    return static_cast<std::size_t>(it - members_.begin());
}

std::uint64_t WeightSector::unrank(std::size_t r) const {
    if (r >= members_.size()) throw std::domain_error("WeightSector::unrank: rank out of range");
    return members_[r];
}

Ket::Ket(int n) : n_(n) {
    if (n < 0 || n > 62) throw std::domain_error("Ket: qubit count must be in [0, 62]");
}

Ket Ket::basis(int n, std::uint64_t label) {
    Ket k(n);
    if (n < 62 && label >> n) throw std::domain_error("Ket::basis: label out of range");
    k.amps_[label] = 1.0;
    return k;
}

cplx Ket::amplitude(std::uint64_t label) const {
    auto it = amps_.find(label);
    return it == amps_.end() ? cplx(0.0) : it->second;
}

void Ket::set_amplitude(std::uint64_t label, cplx v) {
    if (n_ < 62 && label >> n_) throw std::domain_error("Ket::set_amplitude: label out of range");
    if (std::abs(v) <= kAmplitudePrune) {
        amps_.erase(label);
    } else {
        amps_[label] = v;
    }
}

double Ket::norm() const {
    double s = 0.0;
    for (const auto& [label, a] : amps_) s += std::norm(a);
    return std::sqrt(s);
}

Ket dicke_state(int n, int k) {
    if (n < 0) throw std::domain_error("dicke_state: n must be nonnegative");
    if (k < 0 || k > n) throw std::domain_error("dicke_state: k out of range");
    WeightSector sector(n, k);
    double amp = 1.0 / std::sqrt(static_cast<double>(sector.size()));
    Ket ket(n);
    for (std::uint64_t u : sector.members()) ket.set_amplitude(u, amp);
    return ket;
}

Ket w_state(int n) {
    if (n < 1) throw std::domain_error("w_state: n must be positive");
    return dicke_state(n, 1);
}

Ket singlet_pair_state(int i, int j, const Ket& rest) {
    int n = rest.n() + 2;
    if (i == j) throw std::domain_error("singlet_pair_state: qubit indices collide");
    if (i < 0 || j < 0 || i >= n || j >= n)
        throw std::domain_error("singlet_pair_state: qubit index out of range");
    std::vector<int> others;
    for (int q = 0; q < n; ++q)
        if (q != i && q != j) others.push_back(q);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Ket out(n);
    for (const auto& [r, a] : rest.amplitudes()) {
        std::uint64_t base = scatter_bits(r, others);
        out.set_amplitude(base | (1ULL << i), a * inv_sqrt2);
        out.set_amplitude(base | (1ULL << j), -a * inv_sqrt2);
    }
    return out;
}

cplx inner(const Ket& a, const Ket& b) {
    if (a.n() != b.n()) throw std::domain_error("inner: qubit counts differ");
    const auto& small = a.support_size() <= b.support_size() ? a : b;
    const auto& large = a.support_size() <= b.support_size() ? b : a;
    cplx s = 0.0;
    for (const auto& [label, v] : small.amplitudes()) {
        cplx w = large.amplitude(label);
        if (&small == &a)
            s += std::conj(v) * w;
        else
            s += std::conj(w) * v;
    }
    return s;
}

Ket normalize(const Ket& a) {
    double nrm = a.norm();
    if (nrm < 1e-12) throw std::domain_error("normalize: zero-norm vector");
    Ket out(a.n());
    for (const auto& [label, v] : a.amplitudes()) out.set_amplitude(label, v / nrm);
    return out;
}

Ket add_scaled(const Ket& a, cplx c, const Ket& b) {
    if (a.n() != b.n()) throw std::domain_error("add_scaled: qubit counts differ");
    Ket out = a;
    for (const auto& [label, v] : b.amplitudes())
        out.set_amplitude(label, out.amplitude(label) + c * v);
    return out;
}

Ket scaled(const Ket& a, cplx c) {
    Ket out(a.n());
    for (const auto& [label, v] : a.amplitudes()) out.set_amplitude(label, c * v);
    return out;
}

Ket permute_qubits(const Ket& a, const std::vector<int>& perm) {
    int n = a.n();
    if (static_cast<int>(perm.size()) != n)
        throw std::domain_error("permute_qubits: permutation size mismatch");
    std::vector<bool> seen(n, false);
    for (int p : perm) {
        if (p < 0 || p >= n || seen[p]) throw std::domain_error("permute_qubits: not a permutation");
        seen[p] = true;
    }
    Ket out(n);
    for (const auto& [label, v] : a.amplitudes()) {
        std::uint64_t mapped = 0;
        for (int q = 0; q < n; ++q)
            if (label & (1ULL << q)) mapped |= 1ULL << perm[q];
        out.set_amplitude(mapped, v);
    }
    return out;
}

std::uint64_t flip_all_bits(std::uint64_t label, int n) {
    std::uint64_t mask = (n >= 64) ? ~0ULL : ((1ULL << n) - 1);
    return ~label & mask;
}

Ket flip_all_qubits(const Ket& a) {
    Ket out(a.n());
    for (const auto& [label, v] : a.amplitudes())
        out.set_amplitude(flip_all_bits(label, a.n()), v);
    return out;
}

std::uint64_t scatter_bits(std::uint64_t packed, const std::vector<int>& positions) {
    std::uint64_t out = 0;
    for (std::size_t b = 0; b < positions.size(); ++b)
        if (packed & (1ULL << b)) out |= 1ULL << positions[b];
    return out;
}

std::uint64_t gather_bits(std::uint64_t label, const std::vector<int>& positions) {
    std::uint64_t out = 0;
    for (std::size_t b = 0; b < positions.size(); ++b)
        if (label & (1ULL << positions[b])) out |= 1ULL << b;
    return out;
}

}  // namespace qsv
