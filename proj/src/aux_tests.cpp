#include "equiperm/aux_tests.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "equiperm/transform.hpp"

namespace equiperm {

std::string sidedness_name(Sidedness s) {
    switch (s) {
        case Sidedness::two_sided: return "two_sided";
        case Sidedness::greater: return "greater";
        case Sidedness::less: return "less";
    }
    return "two_sided";
}

Sidedness sidedness_from_name(const std::string& name) {
    if (name == "two_sided" || name == "two-sided") return Sidedness::two_sided;
    if (name == "greater") return Sidedness::greater;
    if (name == "less") return Sidedness::less;
    throw std::invalid_argument("unknown sidedness: " + name);
}

SharpTestResult sharp_permutation_test(const TwoSampleData& data, Sidedness sidedness,
                                       const PermutationPlan& plan, int threads) {
    // zero margins make both shifted vectors the raw pooled data, and the
    // engine's pair (t_lower, t_upper) = (mean_b - mean_a, mean_a - mean_b)
    ShiftedPair pair = shift_for_margins(data, MarginPair{0.0, 0.0});
    JointPermutationDistribution joint = joint_distribution(pair, plan, threads);

    SharpTestResult result;
    result.sidedness = sidedness;
    result.plan = joint.plan;
    switch (sidedness) {
        case Sidedness::greater:
            result.statistic_observed = joint.observed_upper;
            result.pvalue = pvalue(joint.t_upper, joint.observed_upper);
            break;
        case Sidedness::less:
            result.statistic_observed = joint.observed_lower;
            result.pvalue = pvalue(joint.t_lower, joint.observed_lower);
            break;
        case Sidedness::two_sided: {
            result.statistic_observed = std::abs(joint.observed_upper);
            std::vector<double> abs_stream(joint.t_upper.size());
            for (std::size_t r = 0; r < joint.t_upper.size(); ++r)
                abs_stream[r] = std::abs(joint.t_upper[r]);
            result.pvalue = pvalue(abs_stream, result.statistic_observed);
            break;
        }
    }
    return result;
}

namespace {

double log_binomial(std::uint32_t n, std::uint32_t k) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

// P(X = x) for X ~ Hypergeometric(population n, successes a, draws n1)
double hypergeom_pmf(std::uint32_t x, std::uint32_t n, std::uint32_t a, std::uint32_t n1) {
    if (x > a || x > n1 || n1 - x > n - a) return 0.0;
    return std::exp(log_binomial(a, x) + log_binomial(n - a, n1 - x) - log_binomial(n, n1));
}

double hypergeom_upper_tail(std::uint32_t x, std::uint32_t n, std::uint32_t a, std::uint32_t n1) {
    double p = 0.0;
    std::uint32_t x_max = std::min(a, n1);
    for (std::uint32_t k = x_max + 1; k-- > x;) {  // small terms first
        p += hypergeom_pmf(k, n, a, n1);
        if (k == 0) break;
    }
    return std::min(p, 1.0);
}

double hypergeom_lower_tail(std::uint32_t x, std::uint32_t n, std::uint32_t a, std::uint32_t n1) {
    double p = 0.0;
    for (std::uint32_t k = 0; k <= x; ++k) p += hypergeom_pmf(k, n, a, n1);
    return std::min(p, 1.0);
}

}  // namespace

SharpTestResult median_test_exact(const TwoSampleData& data, Sidedness sidedness) {
    data.validate();

    std::vector<double> pooled(data.sample_a);
    pooled.insert(pooled.end(), data.sample_b.begin(), data.sample_b.end());
    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());

    const std::uint32_t n = data.n();
    double median;
    if (n % 2 == 1) {
        median = sorted[n / 2];
    } else {
        median = 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    }

    std::uint32_t total_above = 0;
    std::uint32_t a_above = 0;
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        if (pooled[i] > median) {
            ++total_above;
            if (i < data.sample_a.size()) ++a_above;
        }
    }

    SharpTestResult result;
    result.sidedness = sidedness;
    result.statistic_observed = static_cast<double>(a_above);
    result.plan = PermutationPlan::exhaustive();

    if (total_above == 0) {  // all observations equal: degenerate
        result.pvalue = 1.0;
        return result;
    }

    const std::uint32_t n1 = data.n1();
    switch (sidedness) {
        case Sidedness::greater:
            result.pvalue = hypergeom_upper_tail(a_above, n, total_above, n1);
            break;
        case Sidedness::less:
            result.pvalue = hypergeom_lower_tail(a_above, n, total_above, n1);
            break;
        case Sidedness::two_sided: {
            double up = hypergeom_upper_tail(a_above, n, total_above, n1);
            double lo = hypergeom_lower_tail(a_above, n, total_above, n1);
            result.pvalue = std::min(1.0, 2.0 * std::min(up, lo));
            break;
        }
    }
    return result;
}

}  // namespace equiperm
