#pragma once

#include <functional>

#include "qsv/spectral.hpp"

namespace qsv {

// Number of branches whose second stage is a real test (neither empty nor
// the trivial accept-everything measurement).
int branch_number(const AdaptiveTest& t);
int branch_number(const Strategy& s);  // max over tests with branch trees

// One nonadaptive test per branch: the branch's own outcome classes plus an
// accept-everything completion on every other branch's first-stage outcomes.
std::vector<TestOperator> convert_test(const AdaptiveTest& t);

// Merges branches whose classifier labels agree (default: the physical
// measurement setting). Predicates are unioned, outcome classes kept.
using BranchClassifier = std::function<std::string(const Branch&)>;
AdaptiveTest merge_branches(const AdaptiveTest& t, const BranchClassifier& classifier = {});

struct ConversionResult {
    Strategy input;
    Strategy output;
    int alpha = 1;
    double gap_in = 0.0;
    double gap_out = 0.0;
    bool guarantee_ok = false;  // gap_out >= gap_in / alpha
};

// Converts a two-step adaptive strategy to a nonadaptive one. Each branch of
// each test becomes a nonadaptive test with probability mu_j / alpha_j. With
// merge = true, same-setting branches are merged first and the completion on
// foreign branches keeps only the outcomes the target can produce, which
// reproduces the dedicated single-setting tests exactly.
ConversionResult convert_strategy(const Strategy& s, bool merge);

}  // namespace qsv
