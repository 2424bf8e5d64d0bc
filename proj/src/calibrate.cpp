#include "equiperm/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "equiperm/iu_test.hpp"
#include "equiperm/parallel.hpp"
#include "equiperm/transform.hpp"

namespace equiperm {

void CalibrationSpec::validate() const {
    if (n1 < 2 || n2 < 2) throw std::invalid_argument("calibration needs n1, n2 >= 2");
    margins.validate();
    if (margins.degenerate())
        throw std::invalid_argument("calibration is undefined for zero margins");
    if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must lie in (0, 0.5)");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (mc_replicates < 1) throw std::invalid_argument("mc_replicates must be >= 1");
    if (permutations_per_replicate < 1)
        throw std::invalid_argument("permutations_per_replicate must be >= 1");
}

const char* boundary_used_name(BoundaryUsed b) {
    switch (b) {
        case BoundaryUsed::lower: return "lower";
        case BoundaryUsed::upper: return "upper";
        case BoundaryUsed::both_min: return "both_min";
    }
    return "upper";
}

TwoSampleData generate_boundary_dataset(const CalibrationSpec& spec, Boundary which,
                                        rng::Stream& stream) {
    double delta_b = which == Boundary::lower ? -spec.margins.eps_lower : spec.margins.eps_upper;
    TwoSampleData data;
    data.sample_a.resize(spec.n1);
    data.sample_b.resize(spec.n2);
    for (double& v : data.sample_a) v = stream.normal(0.0, spec.sigma);
    for (double& v : data.sample_b) v = stream.normal(delta_b, spec.sigma);
    return data;
}

namespace {

// alpha-quantile of the T_G boundary null at one boundary
double boundary_quantile(const CalibrationSpec& spec, Boundary which, int threads) {
    const std::uint64_t boundary_tag =
        which == Boundary::lower ? rng::tag_boundary_lower : rng::tag_boundary_upper;
    const std::size_t mc = spec.mc_replicates;

    std::vector<double> tg(mc);
    parallel_for(mc, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            rng::Stream data_stream(
                rng::derive(spec.seed, boundary_tag, rng::tag_data, static_cast<std::uint64_t>(m)));
            TwoSampleData data = generate_boundary_dataset(spec, which, data_stream);
            ShiftedPair pair =
                transform_pair(shift_for_margins(data, spec.margins), spec.transform);
            PermutationPlan plan = PermutationPlan::monte_carlo(
                spec.permutations_per_replicate,
                rng::derive(spec.seed, boundary_tag, rng::tag_perm, static_cast<std::uint64_t>(m)));
            tg[m] = detail::global_statistic(pair, plan);
        }
    });

    double q = spec.alpha * static_cast<double>(mc);
    auto k = static_cast<std::size_t>(std::ceil(q * (1.0 - 1e-12)));
    k = std::max<std::size_t>(k, 1);
    std::nth_element(tg.begin(), tg.begin() + static_cast<std::ptrdiff_t>(k - 1), tg.end());
    return tg[k - 1];
}

}  // namespace

CalibrationResult calibrate_alpha(const CalibrationSpec& spec, int threads) {
    spec.validate();

    CalibrationResult result;
    result.spec = spec;
    result.quantile_mc_error =
        std::sqrt(spec.alpha * (1.0 - spec.alpha) / static_cast<double>(spec.mc_replicates));
    result.quantile_warning =
        std::ceil(spec.alpha * static_cast<double>(spec.mc_replicates) * (1.0 - 1e-12)) < 10.0;

    double quantile;
    if (spec.margins.symmetric()) {
        // the lower-boundary simulation is the mirror image of the upper one
        // under the symmetric working model; one pass suffices
        quantile = boundary_quantile(spec, Boundary::upper, threads);
        result.boundary_used = BoundaryUsed::upper;
    } else if (!spec.margins.lower_active()) {
        quantile = boundary_quantile(spec, Boundary::upper, threads);
        result.boundary_used = BoundaryUsed::upper;
    } else if (!spec.margins.upper_active()) {
        quantile = boundary_quantile(spec, Boundary::lower, threads);
        result.boundary_used = BoundaryUsed::lower;
    } else {
        double lo = boundary_quantile(spec, Boundary::lower, threads);
        double up = boundary_quantile(spec, Boundary::upper, threads);
        quantile = std::min(lo, up);
        result.boundary_used = BoundaryUsed::both_min;
    }

    double upper_limit = std::nextafter(0.5 * (1.0 + spec.alpha), 0.0);
    result.alpha_c = std::clamp(quantile, spec.alpha, upper_limit);
    return result;
}

double pooled_sigma(const TwoSampleData& data) {
    data.validate();
    if (data.n() < 3) throw std::invalid_argument("pooled_sigma needs n1 + n2 >= 3");

    auto group_ss = [](const std::vector<double>& x) {
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(x.size());
        double ss = 0.0;
        for (double v : x) ss += (v - mean) * (v - mean);
        return ss;
    };
    double ss = group_ss(data.sample_a) + group_ss(data.sample_b);
    double variance = ss / static_cast<double>(data.n() - 2);
    if (!(variance > 0.0))
        throw std::domain_error("pooled variance is zero: constant data, calibration undefined");
    return std::sqrt(variance);
}

}  // namespace equiperm
