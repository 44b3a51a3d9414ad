#include "qsv/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qsv {

namespace {

constexpr double kClusterTol = 1e-8;

std::string pair_name(int i, int j) {
    return "pair(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
}

AdaptiveTest single_setting_pair_test(Axis axis, const PairOutcomeSet& accept) {
    Branch b;
    b.setting = std::string(1, axis_char(axis)) + std::string(1, axis_char(axis));
    b.terms.push_back({0, accept});
    return make_adaptive_test(0, 1, 2, {b});
}

}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::Bell3: return "bell3";
        case Family::Bell2: return "bell2";
        case Family::W: return "W";
        case Family::Dicke: return "D";
    }
    return "?";
}

std::string mode_name(Mode m) {
    return m == Mode::Adaptive ? "adaptive" : "nonadaptive";
}

Strategy::Strategy(Ket target, std::vector<WeightedTest> tests, std::string name)
    : target_(std::move(target)), tests_(std::move(tests)), op_(target_.n()), name_(std::move(name)) {
    if (tests_.empty()) throw std::invalid_argument("Strategy: needs at least one test");
    double total = 0.0;
    for (const auto& wt : tests_) {
        if (wt.mu <= 0.0) throw std::invalid_argument("Strategy: test probabilities must be positive");
        if (wt.op.n() != target_.n()) throw std::invalid_argument("Strategy: operator size mismatch");
        total += wt.mu;
        op_.add_scaled(wt.op, wt.mu);
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("Strategy: test probabilities must sum to 1");
    op_.prune();
    Ket residual = add_scaled(op_.apply(target_), -1.0, target_);
    if (residual.norm() > 1e-10)
        throw std::invalid_argument("Strategy: target state is not fixed by the operator");
}

Strategy assemble_bell3_strategy() {
    Ket target = dicke_state(2, 1);
    std::vector<WeightedTest> tests;
    auto push = [&](Axis axis, const PairOutcomeSet& accept, const std::string& name) {
        AdaptiveTest tree = single_setting_pair_test(axis, accept);
        tests.push_back({1.0 / 3.0, tree.to_operator(), tree, name});
    };
    push(Axis::X, PairOutcomeSet::coincide(), "XX+");
    push(Axis::Y, PairOutcomeSet::coincide(), "YY+");
    push(Axis::Z, PairOutcomeSet::differ(), "ZZ-");
    return Strategy(std::move(target), std::move(tests), "bell3");
}

Strategy assemble_bell2_strategy() {
    Ket target = dicke_state(2, 1);
    std::vector<WeightedTest> tests;
    AdaptiveTest xx = single_setting_pair_test(Axis::X, PairOutcomeSet::coincide());
    AdaptiveTest zz = single_setting_pair_test(Axis::Z, PairOutcomeSet::differ());
    tests.push_back({0.5, xx.to_operator(), xx, "XX+"});
    tests.push_back({0.5, zz.to_operator(), zz, "ZZ-"});
    return Strategy(std::move(target), std::move(tests), "bell2");
}

namespace {

Strategy assemble_pair_strategy(int n, int k, Mode mode, std::string name) {
    Ket target = dicke_state(n, k);
    double pairs = static_cast<double>(binom(n, 2));
    std::vector<WeightedTest> tests;
    if (mode == Mode::Adaptive) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                AdaptiveTest tree = dicke_adaptive_test(i, j, k, n);
                tests.push_back({1.0 / pairs, tree.to_operator(), tree, pair_name(i, j)});
            }
        }
    } else {
        // All-Z test with probability 1/2; the X-pair tests share the rest.
        AdaptiveTest ztree = z_basis_test_tree(0, 1, k, n);
        tests.push_back({0.5, ztree.to_operator(), ztree, "Z^" + std::to_string(k)});
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                AdaptiveTest tree = xx_basis_test_tree(i, j, k, n);
                tests.push_back({0.5 / pairs, tree.to_operator(), tree, pair_name(i, j)});
            }
        }
    }
    return Strategy(std::move(target), std::move(tests), std::move(name));
}

}  // namespace

Strategy assemble_w_strategy(int n, Mode mode) {
    if (n < 3) throw std::domain_error("assemble_w_strategy: need n >= 3");
    return assemble_pair_strategy(n, 1, mode, "W" + std::to_string(n) + "-" + mode_name(mode));
}

Strategy assemble_dicke_strategy(int n, int k, Mode mode) {
    if (n < 4) throw std::domain_error("assemble_dicke_strategy: need n >= 4");
    if (k < 1 || k > n - 1) throw std::domain_error("assemble_dicke_strategy: k out of range");
    std::string name = "D" + std::to_string(n) + "^" + std::to_string(k) + "-" + mode_name(mode);
    // k = 1 and k = n-1 reduce to the W machinery (the latter via the qubit
    // flip); the general construction already produces those operators.
    return assemble_pair_strategy(n, k, mode, std::move(name));
}

Strategy assemble_strategy(Family family, Mode mode, int n, int k) {
    switch (family) {
        case Family::Bell3: return assemble_bell3_strategy();
        case Family::Bell2: return assemble_bell2_strategy();
        case Family::W: return assemble_w_strategy(n, mode);
        case Family::Dicke: return assemble_dicke_strategy(n, k, mode);
    }
    throw std::domain_error("assemble_strategy: unknown family");
}

EigenDecomposition eigensolve_support(const TestOperator& op, std::size_t max_dim) {
    std::vector<std::uint64_t> labels = op.support_labels();
    std::size_t dim = labels.size();
    if (dim == 0) return {{}, {}, 0, op.n() >= 62 ? 0 : (1ULL << op.n())};
    if (dim > max_dim)
        throw std::runtime_error("eigensolve_support: operator support too large for exact eigensolve");

    std::map<std::uint64_t, std::size_t> index;
    for (std::size_t i = 0; i < dim; ++i) index[labels[i]] = i;

    double max_imag = 0.0;
    for (const auto& [row, cols] : op.rows())
        for (const auto& [col, val] : cols) max_imag = std::max(max_imag, std::abs(val.imag()));

    EigenDecomposition dec;
    dec.support_dim = dim;
    dec.zero_complement = (1ULL << op.n()) - dim;
    dec.values.resize(dim);
    dec.vectors.reserve(dim);

    if (max_imag < 1e-15) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
        for (const auto& [row, cols] : op.rows())
            for (const auto& [col, val] : cols)
                a(static_cast<long>(index.at(row)), static_cast<long>(index.at(col))) = val.real();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("eigensolve_support: eigensolver failed");
        for (std::size_t i = 0; i < dim; ++i) {
            dec.values[i] = solver.eigenvalues()(static_cast<long>(i));
            Ket v(op.n());
            for (std::size_t r = 0; r < dim; ++r)
                v.set_amplitude(labels[r], solver.eigenvectors()(static_cast<long>(r), static_cast<long>(i)));
            dec.vectors.push_back(std::move(v));
        }
    } else {
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
        for (const auto& [row, cols] : op.rows())
            for (const auto& [col, val] : cols)
                a(static_cast<long>(index.at(row)), static_cast<long>(index.at(col))) = val;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("eigensolve_support: eigensolver failed");
        for (std::size_t i = 0; i < dim; ++i) {
            dec.values[i] = solver.eigenvalues()(static_cast<long>(i));
            Ket v(op.n());
            for (std::size_t r = 0; r < dim; ++r)
                v.set_amplitude(labels[r], solver.eigenvectors()(static_cast<long>(r), static_cast<long>(i)));
            dec.vectors.push_back(std::move(v));
        }
    }
    return dec;
}

SpectralReport spectral_gap(const Strategy& s) {
    const TestOperator& omega = s.op();
    EigenDecomposition dec = eigensolve_support(omega);
    if (dec.support_dim == 0) throw std::domain_error("spectral_gap: empty operator");

    // Descending order of support eigenvalues; indices into dec.
    std::vector<std::size_t> order(dec.support_dim);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;

    SpectralReport report;
    report.lambda1 = dec.values[order[0]];

    double lambda2 = -1.0;
    if (order.size() >= 2) lambda2 = dec.values[order[1]];
    if (dec.zero_complement > 0) lambda2 = std::max(lambda2, 0.0);
    if (lambda2 < -0.5) throw std::domain_error("spectral_gap: no second eigenvalue");
    report.lambda2 = lambda2;
    report.nu = 1.0 - lambda2;

    double tol = kClusterTol * std::max(1.0, std::abs(lambda2));
    std::uint64_t mult = 0;
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (std::abs(dec.values[order[i]] - lambda2) <= tol) {
            ++mult;
            report.eigvecs2.push_back(dec.vectors[order[i]]);
        }
    }
    if (std::abs(lambda2) <= tol) mult += dec.zero_complement;
    report.multiplicity2 = mult;

    for (const auto& v : report.eigvecs2) {
        Ket r = add_scaled(omega.apply(v), -lambda2, v);
        report.max_eig_residual = std::max(report.max_eig_residual, r.norm());
        report.max_target_overlap =
            std::max(report.max_target_overlap, std::abs(inner(s.target(), v)));
    }

    // The solve always restricts to the support span; report whether that
    // span is a small contiguous band of weight sectors.
    std::set<int> weights;
    for (std::uint64_t label : omega.support_labels()) weights.insert(std::popcount(label));
    bool contiguous = weights.size() <= 5 &&
                      (*weights.rbegin() - *weights.begin()) == static_cast<int>(weights.size()) - 1;
    report.method = contiguous ? "sector-block" : "dense";
    return report;
}

Rational closed_form_gap(Family family, Mode mode, int n, int k) {
    switch (family) {
        case Family::Bell3: return Rational(2, 3);
        case Family::Bell2: return Rational(1, 2);
        case Family::W:
            if (n < 3) throw std::domain_error("closed_form_gap: W needs n >= 3");
            k = 1;
            break;
        case Family::Dicke:
            if (n < 4) throw std::domain_error("closed_form_gap: Dicke needs n >= 4");
            if (k < 1 || k > n - 1) throw std::domain_error("closed_form_gap: k out of range");
            break;
    }
    std::int64_t nn = n;
    if (mode == Mode::Adaptive) {
        if (family == Family::W && n == 3) return Rational(1, 3);
        if (k == 1 || k == n - 1)
            return rational_min(Rational(1, nn - 1),
                                Rational(1, 2) - Rational(1, nn * (nn - 1)));
        std::int64_t kk = k;
        return rational_min(Rational(1, nn - 1),
                            Rational(1, 2) - Rational(kk * (kk - nn) + nn, nn * (nn - 1)));
    }
    if (family == Family::W && n == 3) return Rational(1, 4);
    return Rational(1, 2 * (nn - 1));
}

std::vector<std::pair<Rational, std::uint64_t>> full_spectrum_w(int n) {
    if (n < 3) throw std::domain_error("full_spectrum_w: need n >= 3");
    std::int64_t nn = n;
    std::uint64_t pairs = binom(n, 2);
    std::vector<std::pair<Rational, std::uint64_t>> spec;
    spec.emplace_back(Rational(1), 1);
    spec.emplace_back(Rational(nn - 2, nn - 1), static_cast<std::uint64_t>(n - 1));
    spec.emplace_back(Rational(1, 2) + Rational(1, nn * (nn - 1)), 1);
    spec.emplace_back(Rational(1, nn * (nn - 1)), pairs - 1);
    spec.emplace_back(Rational(0), (1ULL << n) - static_cast<std::uint64_t>(n) - pairs);
    return spec;
}

std::vector<std::pair<std::int64_t, std::uint64_t>> johnson_spectrum(int n, int k) {
    if (n < 0 || k < 0 || k > n) throw std::domain_error("johnson_spectrum: bad (n, k)");
    std::vector<std::pair<std::int64_t, std::uint64_t>> spec;
    int jmax = std::min(k, n - k);
    for (int j = 0; j <= jmax; ++j) {
        std::int64_t value = static_cast<std::int64_t>(k - j) * (n - k - j) - j;
        std::uint64_t mult = binom(n, j) - binom(n, j - 1);
        spec.emplace_back(value, mult);
    }
    return spec;
}

TestOperator dicke_m1(int n, int k) {
    if (n < 2 || k < 0 || k > n) throw std::domain_error("dicke_m1: bad (n, k)");
    TestOperator op(n);
    double diag = static_cast<double>(static_cast<std::int64_t>(n) * (n - 1) -
                                      static_cast<std::int64_t>(k) * (n - k));
    WeightSector sector(n, k);
    for (std::uint64_t u : sector.members()) {
        op.add(u, u, diag);
        // Johnson adjacency: move one excitation to an empty slot.
        for (int a = 0; a < n; ++a) {
            if (!(u & (1ULL << a))) continue;
            for (int b = 0; b < n; ++b) {
                if (u & (1ULL << b)) continue;
                std::uint64_t v = (u & ~(1ULL << a)) | (1ULL << b);
                op.add(u, v, 1.0);
            }
        }
    }
    return op;
}

TestOperator dicke_m2(int n, int k) {
    if (n < 2 || k < 1 || k > n - 1) throw std::domain_error("dicke_m2: bad (n, k)");
    TestOperator op(n);
    double low_diag = 0.5 * static_cast<double>(n - k) * (n - k + 1);
    double high_diag = 0.5 * static_cast<double>(k) * (k + 1);
    WeightSector low(n, k - 1);
    for (std::uint64_t u : low.members()) {
        op.add(u, u, low_diag);
        for (int a = 0; a < n; ++a) {
            if (u & (1ULL << a)) continue;
            for (int b = a + 1; b < n; ++b) {
                if (u & (1ULL << b)) continue;
                std::uint64_t v = u | (1ULL << a) | (1ULL << b);
                op.add(u, v, 1.0);
                op.add(v, u, 1.0);
            }
        }
    }
    WeightSector high(n, k + 1);
    for (std::uint64_t v : high.members()) op.add(v, v, high_diag);
    return op;
}

std::pair<std::int64_t, Ket> m2_top_eigen(int n, int k) {
    if (n < 4 || k < 1 || k > n - 1) throw std::domain_error("m2_top_eigen: bad (n, k)");
    std::int64_t value = static_cast<std::int64_t>(n) * (n + 1) / 2 +
                         static_cast<std::int64_t>(k) * (k - n);
    double c_low = std::sqrt(static_cast<double>(binom(n, k + 1)));
    double c_high = std::sqrt(static_cast<double>(binom(n, k - 1)));
    Ket vec = normalize(add_scaled(scaled(dicke_state(n, k - 1), c_low), c_high,
                                   dicke_state(n, k + 1)));
    return {value, vec};
}

double worst_case_pass_probability(const Strategy& s, double eps) {
    return worst_case_pass_probability(spectral_gap(s).nu, eps);
}

double worst_case_pass_probability(double nu, double eps) {
    if (eps < 0.0 || eps > 1.0) throw std::domain_error("worst_case_pass_probability: bad eps");
    return 1.0 - nu * eps;
}

RequiredTests required_tests(double nu, double eps, double delta) {
    if (!(nu > 0.0 && nu <= 1.0)) throw std::domain_error("required_tests: nu out of range");
    if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("required_tests: eps out of range");
    if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("required_tests: delta out of range");
    RequiredTests out;
    out.approx = std::log(1.0 / delta) / (nu * eps);
    if (nu * eps >= 1.0) {
        out.exact = 1;  // a single test already rejects with certainty
        return out;
    }
    long double x = static_cast<long double>(nu) * static_cast<long double>(eps);
    long double denom = -std::log1p(-x);  // ln[(1 - nu*eps)^{-1}]
    long double exact = std::ceil(std::log(1.0L / static_cast<long double>(delta)) / denom);
    out.exact = static_cast<std::uint64_t>(exact);
    return out;
}

EigenspaceReport verify_second_eigenspace(const Strategy& s, Family family, int n, int k) {
    if (n < 4) throw std::domain_error("verify_second_eigenspace: need n >= 4");
    int k_eff = family == Family::W ? 1 : k;
    if (k_eff < 1 || k_eff > n - 1)
        throw std::domain_error("verify_second_eigenspace: k out of range");

    Ket rest = dicke_state(n - 2, k_eff - 1);
    std::vector<Ket> phis;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) phis.push_back(singlet_pair_state(i, j, rest));

    EigenspaceReport report;
    report.pair_count = static_cast<int>(phis.size());
    report.expected_dim = n - 1;

    double min_e = 1.0, max_e = 0.0;
    for (const auto& phi : phis) {
        double e = s.op().expectation(phi).real();
        min_e = std::min(min_e, e);
        max_e = std::max(max_e, e);
        Ket residual = add_scaled(s.op().apply(phi), -e, phi);
        report.max_rayleigh_residual = std::max(report.max_rayleigh_residual, residual.norm());
        report.max_target_overlap =
            std::max(report.max_target_overlap, std::abs(inner(s.target(), phi)));
    }
    report.expectation = max_e;
    report.expectation_spread = max_e - min_e;

    Eigen::MatrixXcd gram(phis.size(), phis.size());
    for (std::size_t a = 0; a < phis.size(); ++a)
        for (std::size_t b = 0; b < phis.size(); ++b)
            gram(static_cast<long>(a), static_cast<long>(b)) = inner(phis[a], phis[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram);
    double top = solver.eigenvalues().maxCoeff();
    int rank = 0;
    for (long i = 0; i < solver.eigenvalues().size(); ++i)
        if (solver.eigenvalues()(i) > 1e-9 * std::max(1.0, top)) ++rank;
    report.gram_rank = rank;

    report.ok = report.gram_rank == report.expected_dim &&
                report.max_rayleigh_residual < 1e-9 && report.max_target_overlap < 1e-10 &&
                report.expectation_spread < 1e-10;
    return report;
}

}  // namespace qsv
