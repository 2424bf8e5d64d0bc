#include "equiperm/power_design.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "equiperm/iu_test.hpp"
#include "equiperm/parallel.hpp"
#include "equiperm/transform.hpp"

namespace equiperm {

void PowerQuery::validate() const {
    if (n1 < 2 || n2 < 2) throw std::invalid_argument("power query needs n1, n2 >= 2");
    margins.validate();
    if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must lie in (0, 0.5)");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (mc_replicates < 1) throw std::invalid_argument("mc_replicates must be >= 1");
    if (permutations_per_replicate < 1)
        throw std::invalid_argument("permutations_per_replicate must be >= 1");
}

void DesignSearchSpec::validate() const {
    if (!(target_power > 0.0 && target_power < 1.0))
        throw std::invalid_argument("target power must lie in (0, 1)");
    margins.validate();
    if (!margins.lower_active() || !margins.upper_active())
        throw std::invalid_argument("design search needs finite margins");
    if (margins.degenerate())
        throw std::invalid_argument("design search is undefined for zero margins (empty H1)");
    if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must lie in (0, 0.5)");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
}

std::vector<double> rejection_rates_at(const PowerQuery& query,
                                       std::span<const double> alpha_cs, int threads) {
    query.validate();
    if (alpha_cs.empty()) return {};

    const std::size_t mc = query.mc_replicates;
    const std::size_t k = alpha_cs.size();
    std::vector<std::atomic<std::size_t>> rejections(k);
    parallel_for(mc, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> local(k, 0);
        for (std::size_t m = begin; m < end; ++m) {
            rng::Stream data_stream(rng::derive(query.seed, rng::tag_power, rng::tag_data,
                                                static_cast<std::uint64_t>(m)));
            TwoSampleData data;
            data.sample_a.resize(query.n1);
            data.sample_b.resize(query.n2);
            for (double& v : data.sample_a) v = data_stream.normal(0.0, query.sigma);
            for (double& v : data.sample_b) v = data_stream.normal(query.delta, query.sigma);

            ShiftedPair pair =
                transform_pair(shift_for_margins(data, query.margins), query.transform);
            PermutationPlan plan = PermutationPlan::monte_carlo(
                query.permutations_per_replicate,
                rng::derive(query.seed, rng::tag_power, rng::tag_perm,
                            static_cast<std::uint64_t>(m)));
            double tg = detail::global_statistic(pair, plan);
            for (std::size_t t = 0; t < k; ++t)
                if (tg <= alpha_cs[t]) ++local[t];
        }
        for (std::size_t t = 0; t < k; ++t)
            rejections[t].fetch_add(local[t], std::memory_order_relaxed);
    });

    std::vector<double> rates(k);
    for (std::size_t t = 0; t < k; ++t)
        rates[t] = static_cast<double>(rejections[t].load()) / static_cast<double>(mc);
    return rates;
}

PowerEstimate estimate_power(const PowerQuery& query, int threads) {
    query.validate();

    if (query.margins.degenerate()) {
        // empty alternative: equivalence is never declared
        PowerEstimate estimate;
        estimate.query = query;
        estimate.alpha_c_used = query.alpha;
        estimate.rejection_rate = 0.0;
        estimate.mc_standard_error = 0.0;
        return estimate;
    }

    double alpha_c = query.alpha;
    switch (query.mode) {
        case PowerQuery::Mode::naive:
            alpha_c = query.alpha;
            break;
        case PowerQuery::Mode::calibrated:
            alpha_c = query.alpha_c_fixed;
            break;
        case PowerQuery::Mode::auto_calibrate: {
            CalibrationSpec spec;
            spec.n1 = query.n1;
            spec.n2 = query.n2;
            spec.margins = query.margins;
            spec.alpha = query.alpha;
            spec.sigma = query.sigma;
            spec.mc_replicates = query.mc_replicates;
            spec.permutations_per_replicate = query.permutations_per_replicate;
            spec.seed = rng::derive(query.seed, rng::tag_calibration);
            spec.transform = query.transform;
            alpha_c = calibrate_alpha(spec, threads).alpha_c;
            break;
        }
    }
    // one-sided problems run the remaining partial test at the global level
    if (!query.margins.lower_active() || !query.margins.upper_active()) alpha_c = query.alpha;

    PowerEstimate estimate;
    estimate.query = query;
    estimate.alpha_c_used = alpha_c;
    estimate.rejection_rate = rejection_rates_at(query, std::span(&alpha_c, 1), threads)[0];
    estimate.mc_standard_error =
        std::sqrt(estimate.rejection_rate * (1.0 - estimate.rejection_rate) /
                  static_cast<double>(query.mc_replicates));
    return estimate;
}

namespace {

PowerEstimate design_power_at(const DesignSearchSpec& spec, std::uint32_t n, int threads) {
    PowerQuery query;
    // maximal power is evaluated at the interval midpoint (0 for symmetric margins)
    query.delta = 0.5 * (spec.margins.eps_upper - spec.margins.eps_lower);
    query.n1 = n;
    query.n2 = n;
    query.margins = spec.margins;
    query.alpha = spec.alpha;
    query.mode = PowerQuery::Mode::auto_calibrate;
    query.sigma = spec.sigma;
    query.mc_replicates = spec.mc_replicates;
    query.permutations_per_replicate = spec.permutations_per_replicate;
    query.seed = rng::derive(spec.seed, rng::tag_design, static_cast<std::uint64_t>(n));
    return estimate_power(query, threads);
}

}  // namespace

DesignResult find_design(const DesignSearchSpec& spec, int threads) {
    spec.validate();

    // doubling bracket; n = 1 is structurally below the minimum group size
    std::uint32_t lo = 1;
    std::uint32_t hi = 2;
    double hi_power = 0.0;
    for (;;) {
        PowerEstimate est = design_power_at(spec, hi, threads);
        hi_power = est.rejection_rate;
        if (hi_power >= spec.target_power) break;
        lo = hi;
        if (hi > spec.n_cap / 2) {
            if (hi >= spec.n_cap)
                throw std::runtime_error(
                    "design search exceeded the n cap of " + std::to_string(spec.n_cap) +
                    " (last bracket n = " + std::to_string(hi) +
                    ", power = " + std::to_string(hi_power) + ")");
            hi = spec.n_cap;
        } else {
            hi *= 2;
        }
    }

    // bisection to the smallest n meeting the target
    while (hi - lo > 1) {
        std::uint32_t mid = lo + (hi - lo) / 2;
        PowerEstimate est = design_power_at(spec, mid, threads);
        if (est.rejection_rate >= spec.target_power) {
            hi = mid;
            hi_power = est.rejection_rate;
        } else {
            lo = mid;
        }
    }

    DesignResult result;
    result.n_per_group = hi;
    result.achieved_power = hi_power;
    result.method = DesignResult::Method::simulation_search;
    return result;
}

DesignResult inverse_square_design(double eps, double n_at_unit) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(n_at_unit > 0.0)) throw std::invalid_argument("n_at_unit must be positive");
    DesignResult result;
    result.n_per_group = static_cast<std::uint32_t>(std::ceil(n_at_unit / (eps * eps)));
    result.achieved_power = std::numeric_limits<double>::quiet_NaN();
    result.method = DesignResult::Method::inverse_square_rule;
    return result;
}

}  // namespace equiperm
