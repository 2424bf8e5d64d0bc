#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "equiperm/calibrate.hpp"
#include "equiperm/types.hpp"

namespace equiperm {

/// Rejection-probability query at true effect delta under the normal model
/// sample_a ~ N(0, sigma), sample_b ~ N(delta, sigma).
struct PowerQuery {
    enum class Mode { naive, calibrated, auto_calibrate };

    double delta = 0.0;
    std::uint32_t n1 = 0;
    std::uint32_t n2 = 0;
    MarginPair margins;
    double alpha = 0.05;
    Mode mode = Mode::naive;
    double alpha_c_fixed = 0.0;  // Mode::calibrated
    double sigma = 1.0;
    std::uint32_t mc_replicates = 5000;
    std::uint32_t permutations_per_replicate = 2500;
    std::uint64_t seed = 0;
    TransformKind transform = TransformKind::identity;

    void validate() const;
};

struct PowerEstimate {
    double rejection_rate = 0.0;
    double mc_standard_error = 0.0;  // sqrt(p(1-p)/MC)
    double alpha_c_used = 0.0;
    PowerQuery query;
};

/// Proportion of MC replicates in which the IU test declares equivalence
/// under the selected alpha_c mode (auto_calibrate runs the calibration once,
/// seeded from the query seed).
PowerEstimate estimate_power(const PowerQuery& query, int threads = 0);

/// Rejection rates of one simulated replicate stream evaluated at several
/// explicit thresholds (the per-replicate T_G is computed once and compared
/// against each). query.mode is ignored here.
std::vector<double> rejection_rates_at(const PowerQuery& query,
                                       std::span<const double> alpha_cs, int threads = 0);

struct DesignResult {
    enum class Method { simulation_search, inverse_square_rule };

    std::uint32_t n_per_group = 0;
    /// estimated power at the returned n (NaN for the extrapolation rule)
    double achieved_power = 0.0;
    Method method = Method::simulation_search;
};

struct DesignSearchSpec {
    double target_power = 0.8;
    MarginPair margins;
    double alpha = 0.05;
    double sigma = 1.0;
    std::uint32_t mc_replicates = 5000;
    std::uint32_t permutations_per_replicate = 2500;
    std::uint64_t seed = 0;
    std::uint32_t n_cap = 10000;

    void validate() const;
};

/// Smallest n1 = n2 whose estimated maximal power (auto-calibrated, evaluated
/// at the interval midpoint, delta = 0 for symmetric margins) meets
/// target_power: doubling bracket then bisection, every point at the spec's
/// mc_replicates. Each candidate n keys its own streams, so the search path
/// does not affect any point estimate.
DesignResult find_design(const DesignSearchSpec& spec, int threads = 0);

/// ceil(n_at_unit / eps^2) (the inverse-square extrapolation from the fitted
/// unit-margin design).
DesignResult inverse_square_design(double eps, double n_at_unit = 17.38);

}  // namespace equiperm
