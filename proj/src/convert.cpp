#include "qsv/convert.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

namespace qsv {

namespace {

std::array<cplx, 2> outcome_vector(Axis axis, int outcome) {
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
    throw std::logic_error("outcome_vector: bad axis");
}

bool branch_is_trivial(const Branch& branch) {
    bool any = false;
    for (const auto& term : branch.terms) {
        if (term.accept.is_none()) continue;
        if (!term.accept.is_all()) return false;
        any = true;
    }
    return any;  // all-accept terms only: measures nothing useful
}

bool branch_is_empty(const Branch& branch) {
    for (const auto& term : branch.terms)
        if (!term.accept.is_none()) return false;
    return true;
}

// Outcomes of a pair measurement in the given basis that the target state can
// produce when the other qubits show `weight` excitations.
PairOutcomeSet target_support_accept(const Ket& target, const AdaptiveTest& t,
                                     const std::string& setting, int weight) {
    Axis ai = axis_from_char(setting.at(0));
    Axis aj = axis_from_char(setting.at(1));
    std::uint64_t bi = 1ULL << t.qi;
    std::uint64_t bj = 1ULL << t.qj;

    // Conditional pair vectors grouped by the rest pattern.
    std::map<std::uint64_t, std::array<cplx, 4>> groups;
    for (const auto& [label, amp] : target.amplitudes()) {
        std::uint64_t rest = label & ~(bi | bj);
        if (std::popcount(rest) != weight) continue;
        int p = ((label & bi) ? 2 : 0) | ((label & bj) ? 1 : 0);
        groups[rest][p] += amp;
    }

    PairOutcomeSet accept = PairOutcomeSet::none();
    for (const auto& [rest, vec] : groups) {
        for (int oi = 0; oi < 2; ++oi) {
            for (int oj = 0; oj < 2; ++oj) {
                if (accept.accept[oi * 2 + oj]) continue;
                auto vi = outcome_vector(ai, oi);
                auto vj = outcome_vector(aj, oj);
                cplx coef = 0.0;
                for (int p = 0; p < 4; ++p)
                    coef += std::conj(vi[(p >> 1) & 1] * vj[p & 1]) * vec[p];
                if (std::abs(coef) > 1e-12) accept.accept[oi * 2 + oj] = true;
            }
        }
    }
    return accept;
}

// The nonadaptive test derived from branch `a`: keep the branch's outcome
// classes and complete every other branch's first-stage outcomes, either with
// accept-all or with the outcomes the target supports.
AdaptiveTest nonadaptive_form(const AdaptiveTest& t, std::size_t a, const Ket* target) {
    const Branch& own = t.branches[a];
    Branch merged;
    merged.setting = own.setting;
    merged.terms = own.terms;
    for (std::size_t b = 0; b < t.branches.size(); ++b) {
        if (b == a) continue;
        for (const auto& term : t.branches[b].terms) {
            PairOutcomeSet completion =
                target ? target_support_accept(*target, t, own.setting, term.first_weight)
                       : PairOutcomeSet::all();
            merged.terms.push_back({term.first_weight, completion});
        }
    }
    return make_adaptive_test(t.qi, t.qj, t.n, {merged});
}

}  // namespace

int branch_number(const AdaptiveTest& t) {
    int count = 0;
    for (const auto& branch : t.branches)
        if (!branch_is_trivial(branch) && !branch_is_empty(branch)) ++count;
    return std::max(count, 1);
}

int branch_number(const Strategy& s) {
    int alpha = 1;
    for (const auto& wt : s.tests())
        if (wt.tree) alpha = std::max(alpha, branch_number(*wt.tree));
    return alpha;
}

std::vector<TestOperator> convert_test(const AdaptiveTest& t) {
    t.check_disjoint_branches();
    std::vector<TestOperator> out;
    for (std::size_t a = 0; a < t.branches.size(); ++a) {
        if (branch_is_empty(t.branches[a]) || branch_is_trivial(t.branches[a])) continue;
        out.push_back(nonadaptive_form(t, a, nullptr).to_operator());
    }
    if (out.empty()) out.push_back(t.to_operator());
    return out;
}

AdaptiveTest merge_branches(const AdaptiveTest& t, const BranchClassifier& classifier) {
    auto label_of = [&](const Branch& b) { return classifier ? classifier(b) : b.setting; };
    std::vector<std::string> order;
    std::map<std::string, Branch> groups;
    for (const auto& branch : t.branches) {
        std::string label = label_of(branch);
        auto it = groups.find(label);
        if (it == groups.end()) {
            order.push_back(label);
            groups.emplace(label, branch);
        } else {
            if (it->second.setting != branch.setting)
                throw std::domain_error("merge_branches: branches with different settings share a label");
            for (const auto& term : branch.terms) it->second.terms.push_back(term);
        }
    }
    std::vector<Branch> merged;
    merged.reserve(order.size());
    for (const auto& label : order) merged.push_back(groups.at(label));
    return make_adaptive_test(t.qi, t.qj, t.n, std::move(merged));
}

ConversionResult convert_strategy(const Strategy& s, bool merge) {
    std::vector<WeightedTest> out_tests;
    int alpha = 1;
    for (const auto& wt : s.tests()) {
        if (!wt.tree)
            throw std::domain_error("convert_strategy: test lacks a two-step branch form");
        AdaptiveTest t = merge ? merge_branches(*wt.tree) : *wt.tree;
        int alpha_j = branch_number(t);
        alpha = std::max(alpha, alpha_j);
        const Ket* target = merge ? &s.target() : nullptr;
        bool any = false;
        for (std::size_t a = 0; a < t.branches.size(); ++a) {
            if (branch_is_empty(t.branches[a]) || branch_is_trivial(t.branches[a])) continue;
            AdaptiveTest tree = nonadaptive_form(t, a, target);
            out_tests.push_back({wt.mu / alpha_j, tree.to_operator(), tree,
                                 wt.name + "/" + t.branches[a].setting});
            any = true;
        }
        if (!any) out_tests.push_back({wt.mu, wt.op, wt.tree, wt.name});
    }
    Strategy output(s.target(), std::move(out_tests), s.name() + "-converted");
    double gap_in = spectral_gap(s).nu;
    double gap_out = spectral_gap(output).nu;
    ConversionResult result{s, std::move(output), alpha, gap_in, gap_out, false};
    result.guarantee_ok = gap_out >= gap_in / alpha - 1e-10;
    return result;
}

}  // namespace qsv
