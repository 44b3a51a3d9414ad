#include <doctest.h>

#include <bit>
#include <cmath>
#include <vector>

#include "qsv/hilbert.hpp"

using namespace qsv;

TEST_SUITE_BEGIN("hilbert");

namespace {

// Independent Pascal-triangle oracle for binomial coefficients.
std::uint64_t pascal(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::vector<std::vector<std::uint64_t>> rows(n + 1);
    for (int i = 0; i <= n; ++i) {
        rows[i].assign(i + 1, 1);
        for (int j = 1; j < i; ++j) rows[i][j] = rows[i - 1][j - 1] + rows[i - 1][j];
    }
    return rows[n][k];
}

}  // namespace

TEST_CASE("binom matches the Pascal triangle") {
    CHECK(binom(4, 2) == 6);
    CHECK(binom(5, -1) == 0);
    CHECK(binom(30, 15) == pascal(30, 15));
    CHECK(binom(30, 15) == 155117520ULL);
    for (int n = 0; n <= 30; ++n)
        for (int k = -1; k <= n + 1; ++k) CHECK(binom(n, k) == pascal(n, k));
    CHECK(binom(64, 32) == 1832624140942590534ULL);
    CHECK_THROWS_AS(binom(65, 1), std::domain_error);
    CHECK_THROWS_AS(binom(-1, 0), std::domain_error);
}

TEST_CASE("basis states cache weight and validate labels") {
    BasisState s(0b1011, 4);
    CHECK(s.weight == 3);
    CHECK(s.n == 4);
    CHECK_THROWS_AS(BasisState(1 << 4, 4), std::domain_error);
}

TEST_CASE("weight sectors enumerate ascending with rank/unrank round trip") {
    WeightSector sector(4, 2);
    CHECK(sector.size() == 6);
    std::vector<std::uint64_t> expected{0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100};
    CHECK(sector.members() == expected);

    for (int n = 1; n <= 16; ++n) {
        for (int k = 0; k <= n; ++k) {
            WeightSector s(n, k);
            CHECK(s.size() == binom(n, k));
            for (std::size_t r = 0; r < s.size(); ++r) CHECK(s.rank(s.unrank(r)) == r);
            for (std::size_t r = 1; r < s.size(); ++r) CHECK(s.members()[r - 1] < s.members()[r]);
        }
    }
    CHECK_THROWS_AS(sector.rank(0b0001), std::domain_error);
}

TEST_CASE("dicke states are uniform over their weight sector") {
    Ket d = dicke_state(2, 1);
    CHECK(d.support_size() == 2);
    CHECK(d.amplitude(0b01).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(d.amplitude(0b10).real() == doctest::Approx(1.0 / std::sqrt(2.0)));

    Ket zeros = dicke_state(5, 0);
    CHECK(zeros.support_size() == 1);
    CHECK(zeros.amplitude(0) == cplx(1.0));

    Ket d42 = dicke_state(4, 2);
    CHECK(d42.support_size() == 6);
    for (const auto& [label, a] : d42.amplitudes())
        CHECK(std::abs(a - cplx(1.0 / std::sqrt(6.0))) < 1e-15);

    // Amplitude-squared times the sector size is exactly one.
    for (int n = 1; n <= 12; ++n) {
        for (int k = 0; k <= n; ++k) {
            Ket d2 = dicke_state(n, k);
            CHECK(d2.support_size() == binom(n, k));
            for (const auto& [label, a] : d2.amplitudes()) {
                CHECK(std::popcount(label) == k);
                CHECK(std::norm(a) * static_cast<double>(binom(n, k)) ==
                      doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }
    CHECK_THROWS_AS(dicke_state(4, 5), std::domain_error);
}

TEST_CASE("w states") {
    Ket w3 = w_state(3);
    CHECK(w3.support_size() == 3);
    for (std::uint64_t label : {0b001ULL, 0b010ULL, 0b100ULL})
        CHECK(std::abs(w3.amplitude(label) - cplx(1.0 / std::sqrt(3.0))) < 1e-15);

    CHECK(std::abs(inner(w_state(2), dicke_state(2, 1)) - cplx(1.0)) < 1e-15);

    Ket w1 = w_state(1);
    CHECK(w1.amplitude(1) == cplx(1.0));
    CHECK_THROWS_AS(w_state(0), std::domain_error);
}

TEST_CASE("dicke states are permutation invariant") {
    for (int n : {3, 4, 6}) {
        for (int k = 0; k <= n; ++k) {
            Ket d = dicke_state(n, k);
            for (int a = 0; a < n; ++a) {
                for (int b = a + 1; b < n; ++b) {
                    std::vector<int> perm(n);
                    for (int q = 0; q < n; ++q) perm[q] = q;
                    std::swap(perm[a], perm[b]);
                    Ket swapped = permute_qubits(d, perm);
                    CHECK(add_scaled(swapped, -1.0, d).norm() < 1e-14);
                }
            }
        }
    }
}

TEST_CASE("singlet pair embedding") {
    // Pair (1,2) in 1-based labels is (0,1) here: excitation on the first
    // pair qubit carries the plus sign.
    Ket phi = singlet_pair_state(0, 1, Ket::basis(1, 0));
    CHECK(phi.n() == 3);
    CHECK(std::abs(phi.amplitude(0b001) - cplx(1.0 / std::sqrt(2.0))) < 1e-15);
    CHECK(std::abs(phi.amplitude(0b010) + cplx(1.0 / std::sqrt(2.0))) < 1e-15);
    CHECK(std::abs(phi.norm() - 1.0) < 1e-14);

    // Expanded by hand: singlet on (0,1) times (|01>+|10>)/sqrt(2) on (2,3).
    Ket rest = dicke_state(2, 1);
    Ket phi4 = singlet_pair_state(0, 1, rest);
    CHECK(phi4.support_size() == 4);
    CHECK(std::abs(phi4.amplitude(0b0101) - cplx(0.5)) < 1e-15);
    CHECK(std::abs(phi4.amplitude(0b1001) - cplx(0.5)) < 1e-15);
    CHECK(std::abs(phi4.amplitude(0b0110) + cplx(0.5)) < 1e-15);
    CHECK(std::abs(phi4.amplitude(0b1010) + cplx(0.5)) < 1e-15);

    for (int n : {3, 4, 5, 6}) {
        Ket w = w_state(n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                Ket f = singlet_pair_state(i, j, dicke_state(n - 2, 0));
                CHECK(std::abs(inner(f, w)) < 1e-14);
            }
    }
    CHECK_THROWS_AS(singlet_pair_state(1, 1, Ket::basis(1, 0)), std::domain_error);
}

TEST_CASE("inner product, normalize, add_scaled") {
    CHECK(std::abs(inner(w_state(3), w_state(3)) - cplx(1.0)) < 1e-15);
    CHECK(std::abs(inner(dicke_state(4, 2), dicke_state(4, 1))) < 1e-15);

    // Conjugate-linearity in the first argument.
    Ket a(2), b(2);
    a.set_amplitude(0, cplx(0.0, 1.0));
    b.set_amplitude(0, cplx(1.0));
    CHECK(std::abs(inner(a, b) - cplx(0.0, -1.0)) < 1e-15);

    Ket unchanged = add_scaled(w_state(4), 0.0, dicke_state(4, 2));
    CHECK(add_scaled(unchanged, -1.0, w_state(4)).norm() < 1e-15);

    CHECK_THROWS_AS(normalize(Ket(2)), std::domain_error);

    Ket scaled_down = scaled(w_state(3), 0.25);
    CHECK(std::abs(normalize(scaled_down).norm() - 1.0) < 1e-14);
}

TEST_CASE("flip maps dicke states to their complement") {
    Ket d43 = dicke_state(4, 3);
    Ket flipped = flip_all_qubits(d43);
    CHECK(add_scaled(flipped, -1.0, dicke_state(4, 1)).norm() < 1e-14);
    // Involution.
    CHECK(add_scaled(flip_all_qubits(flipped), -1.0, d43).norm() < 1e-14);
    CHECK(flip_all_bits(0b0011, 4) == 0b1100);
}

TEST_CASE("scatter and gather are inverse") {
    std::vector<int> positions{0, 2, 5};
    for (std::uint64_t packed = 0; packed < 8; ++packed) {
        std::uint64_t label = scatter_bits(packed, positions);
        CHECK(gather_bits(label, positions) == packed);
    }
}

TEST_SUITE_END();
