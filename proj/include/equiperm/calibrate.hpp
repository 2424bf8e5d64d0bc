#pragma once

#include <cstdint>
#include <vector>

#include "equiperm/rng.hpp"
#include "equiperm/types.hpp"

namespace equiperm {

/// Settings for Monte Carlo calibration of the partial level alpha_c under a
/// normal working model: sample_a ~ N(0, sigma), sample_b ~ N(boundary, sigma).
struct CalibrationSpec {
    std::uint32_t n1 = 0;
    std::uint32_t n2 = 0;
    MarginPair margins;
    double alpha = 0.05;
    double sigma = 1.0;
    std::uint32_t mc_replicates = 5000;
    std::uint32_t permutations_per_replicate = 2500;
    std::uint64_t seed = 0;
    TransformKind transform = TransformKind::identity;

    void validate() const;
};

enum class Boundary { lower, upper };

enum class BoundaryUsed { lower, upper, both_min };

const char* boundary_used_name(BoundaryUsed b);

struct CalibrationResult {
    double alpha_c = 0.0;
    BoundaryUsed boundary_used = BoundaryUsed::upper;
    /// binomial standard error of the quantile level: sqrt(alpha(1-alpha)/MC)
    double quantile_mc_error = 0.0;
    /// set when ceil(alpha * MC) < 10: the order statistic is too far out in
    /// the tail for the requested MC size
    bool quantile_warning = false;
    CalibrationSpec spec;
};

/// One synthetic dataset at an equivalence boundary: sample_b mean sits at
/// -eps_lower (lower) or +eps_upper (upper).
TwoSampleData generate_boundary_dataset(const CalibrationSpec& spec, Boundary which,
                                        rng::Stream& stream);

/// alpha_c as the empirical alpha-quantile (ceil(alpha*MC)-th smallest) of the
/// boundary null distribution of T_G = max(lambda_lower, lambda_upper),
/// clamped into [alpha, (1+alpha)/2). Symmetric margins simulate the upper
/// boundary only (the lower-boundary distribution is its mirror image);
/// asymmetric margins take the min over both active boundaries.
CalibrationResult calibrate_alpha(const CalibrationSpec& spec, int threads = 0);

/// Pooled standard deviation sqrt(((n1-1)s1^2 + (n2-1)s2^2) / (n1+n2-2)).
/// Errors on constant data (calibration undefined).
double pooled_sigma(const TwoSampleData& data);

}  // namespace equiperm
