#include "equiperm/iu_test.hpp"

#include <algorithm>
#include <stdexcept>

#include "equiperm/transform.hpp"

namespace equiperm {

double combine_max(const PartialPValues& pvalues) {
    if (pvalues.lambda_lower && pvalues.lambda_upper)
        return std::max(*pvalues.lambda_lower, *pvalues.lambda_upper);
    if (pvalues.lambda_lower) return *pvalues.lambda_lower;
    if (pvalues.lambda_upper) return *pvalues.lambda_upper;
    throw std::invalid_argument("combine_max: no active partial test");
}

AdaptiveGlobalStream adaptive_stream(const JointPermutationDistribution& joint) {
    AdaptiveGlobalStream out;
    // ties pick the lower side, deterministically
    bool pick_lower = joint.observed_lower <= joint.observed_upper;
    if (!joint.lower_active) pick_lower = false;
    if (!joint.upper_active) pick_lower = true;
    out.w_lower = pick_lower ? 1.0 : 0.0;
    out.w_upper = pick_lower ? 0.0 : 1.0;
    out.t_global_stream = pick_lower ? joint.t_lower : joint.t_upper;
    out.observed_global = pick_lower ? joint.observed_lower : joint.observed_upper;
    return out;
}

IuStatistics compute_iu_statistics(const TwoSampleData& data, const MarginPair& margins,
                                   TransformKind transform, const PermutationPlan& plan,
                                   int threads) {
    ShiftedPair pair = transform_pair(shift_for_margins(data, margins), transform);
    IuStatistics stats;
    stats.degenerate_margins = margins.degenerate();
    stats.joint = joint_distribution(pair, plan, threads);
    if (stats.joint.lower_active)
        stats.pvalues.lambda_lower = pvalue(stats.joint.t_lower, stats.joint.observed_lower);
    if (stats.joint.upper_active)
        stats.pvalues.lambda_upper = pvalue(stats.joint.t_upper, stats.joint.observed_upper);
    stats.t_global = combine_max(stats.pvalues);
    return stats;
}

IuTestResult run_iu_test(const TwoSampleData& data, const MarginPair& margins, double alpha,
                         TransformKind transform, const PermutationPlan& plan,
                         const AlphaSource& alpha_source, int threads) {
    if (!(alpha > 0.0 && alpha < 0.5))
        throw std::invalid_argument("alpha must lie in (0, 0.5)");

    IuStatistics stats = compute_iu_statistics(data, margins, transform, plan, threads);

    IuTestResult result;
    result.observed = {stats.joint.observed_lower, stats.joint.observed_upper};
    result.pvalues = stats.pvalues;
    result.t_global = stats.t_global;
    result.alpha = alpha;
    result.transform = transform;
    result.margins = margins;
    result.plan = stats.joint.plan;
    result.alpha_c_source = alpha_source.kind;
    result.degenerate_margins = stats.degenerate_margins;
    result.one_sided = !(margins.lower_active() && margins.upper_active());

    if (result.one_sided) {
        // one partial test left: it runs at the global level
        result.alpha_c = alpha;
    } else if (result.degenerate_margins) {
        // H1 is empty; no calibration to run, margin sweeps must not abort
        result.alpha_c = alpha;
    } else {
        switch (alpha_source.kind) {
            case AlphaSource::Kind::naive:
                result.alpha_c = alpha;
                break;
            case AlphaSource::Kind::fixed:
                result.alpha_c = alpha_source.fixed_value;
                break;
            case AlphaSource::Kind::calibrate: {
                if (!alpha_source.calibration)
                    throw std::invalid_argument("calibrate mode needs a CalibrationSpec");
                result.calibration = calibrate_alpha(*alpha_source.calibration, threads);
                result.alpha_c = result.calibration->alpha_c;
                break;
            }
        }
    }

    result.decision = result.t_global <= result.alpha_c ? Decision::equivalence
                                                        : Decision::non_equivalence;
    if (result.degenerate_margins) result.decision = Decision::non_equivalence;
    return result;
}

namespace detail {

double global_statistic(const ShiftedPair& pair, const PermutationPlan& plan) {
    PairEvaluator eval(pair);
    const std::uint32_t n = pair.n();
    const std::uint32_t n1 = pair.n1;

    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0u);
    auto [obs_lower, obs_upper] = eval(std::span<const std::uint32_t>(identity.data(), n1));

    std::size_t rows = static_cast<std::size_t>(plan.replicates);
    if (plan.mode == PermutationPlan::Mode::exhaustive) {
        auto count = binomial_within(n, n1, PermutationPlan::enumeration_cap);
        if (!count) throw std::invalid_argument("exhaustive enumeration exceeds the cap");
        rows = static_cast<std::size_t>(*count);
    }

    std::size_t count_lower = 0;
    std::size_t count_upper = 0;
    for_each_slot1(n, n1, plan, 0, rows, [&](std::size_t, std::span<const std::uint32_t> slot1) {
        auto [tl, tu] = eval(slot1);
        if (tl >= obs_lower) ++count_lower;
        if (tu >= obs_upper) ++count_upper;
    });

    double denom = static_cast<double>(rows);
    double lambda_lower = static_cast<double>(count_lower) / denom;
    double lambda_upper = static_cast<double>(count_upper) / denom;
    if (!pair.lower_active) return lambda_upper;
    if (!pair.upper_active) return lambda_lower;
    return std::max(lambda_lower, lambda_upper);
}

}  // namespace detail

}  // namespace equiperm
