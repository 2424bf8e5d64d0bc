#pragma once

#include "equiperm/perm_engine.hpp"
#include "equiperm/types.hpp"

namespace equiperm {

enum class Sidedness { two_sided, greater, less };

std::string sidedness_name(Sidedness s);
Sidedness sidedness_from_name(const std::string& name);

struct SharpTestResult {
    double statistic_observed = 0.0;
    double pvalue = 0.0;
    Sidedness sidedness = Sidedness::two_sided;
    PermutationPlan plan;
};

/// Sharp-null permutation test on the raw pooled data: |mean_a - mean_b| for
/// two_sided, the signed difference for one-sided runs ("greater" means
/// sample_a stochastically larger).
SharpTestResult sharp_permutation_test(const TwoSampleData& data, Sidedness sidedness,
                                       const PermutationPlan& plan, int threads = 0);

/// Exact Fisher-Mood median test: classify pooled observations as strictly
/// above / not above the pooled median (even n: midpoint of the central order
/// statistics; ties with the median count as "not above") and take the exact
/// hypergeometric tail of the sample_a above-count. Two-sided doubles the
/// smaller tail, capped at 1. All observations equal degenerates to p = 1.
SharpTestResult median_test_exact(const TwoSampleData& data, Sidedness sidedness);

}  // namespace equiperm
