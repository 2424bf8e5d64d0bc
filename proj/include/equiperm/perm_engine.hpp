#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "equiperm/rng.hpp"
#include "equiperm/types.hpp"

namespace equiperm {

/// How the permutation distribution is sampled.
struct PermutationPlan {
    enum class Mode { monte_carlo, exhaustive };

    Mode mode = Mode::monte_carlo;
    std::uint64_t replicates = 100000;  // R; ignored in exhaustive mode
    std::uint64_t seed = 0;
    bool include_identity = false;  // MC only: row 0 becomes the identity labels

    /// Exhaustive enumeration is over distinct group splits, capped here.
    static constexpr std::uint64_t enumeration_cap = 200000;

    static PermutationPlan monte_carlo(std::uint64_t r, std::uint64_t seed,
                                       bool include_identity = false) {
        return {Mode::monte_carlo, r, seed, include_identity};
    }
    static PermutationPlan exhaustive() { return {Mode::exhaustive, 0, 0, false}; }

    void validate() const;
};

/// Paired permutation streams (T_lower*, T_upper*), entry r of both arising
/// from the same label permutation, plus the observed (identity) statistics.
struct JointPermutationDistribution {
    std::vector<double> t_lower;
    std::vector<double> t_upper;
    double observed_lower = 0.0;
    double observed_upper = 0.0;
    PermutationPlan plan;
    std::uint32_t n = 0;
    std::uint32_t n1 = 0;
    bool lower_active = true;
    bool upper_active = true;

    std::size_t rows() const { return t_lower.size(); }
};

/// C(n, k), or nullopt if it exceeds `cap` (overflow-safe).
std::optional<std::uint64_t> binomial_within(std::uint32_t n, std::uint32_t k, std::uint64_t cap);

/// Uniform random permutation of labels (0..n-1); deterministic given the stream.
std::vector<std::uint32_t> draw_permutation(std::uint32_t n, rng::Stream& stream);

/// Evaluates both partial statistics for the group split put into sample-a
/// slots. Totals are fixed at construction and slot-1 sums accumulate in the
/// order the indices are visited, so the identity labels reproduce the
/// observed statistics bit-for-bit and the pooled sum is shared by all rows.
class PairEvaluator {
public:
    explicit PairEvaluator(const ShiftedPair& pair);

    /// slot1 holds the n1 pooled indices landing in sample-a positions.
    std::pair<double, double> operator()(std::span<const std::uint32_t> slot1) const;

private:
    const double* xl_;
    const double* xu_;
    std::uint32_t n1_;
    double total_lower_;
    double total_upper_;
    double inv_n1_;
    double inv_n2_;
};

/// (T_lower, T_upper) for one label permutation:
/// T_lower = mean of x_lower at permuted positions n1+1..n minus mean at 1..n1,
/// T_upper = mean of x_upper at permuted positions 1..n1 minus mean at n1+1..n.
std::pair<double, double> partial_statistics(const ShiftedPair& pair,
                                             std::span<const std::uint32_t> labels);

/// Simulate (or enumerate) the bivariate permutation distribution: R paired
/// evaluations, each pair from one shared permutation; observed values from
/// the identity labels. Exhaustive mode visits every distinct group split
/// once (lexicographic order) and sets R := C(n, n1).
JointPermutationDistribution joint_distribution(const ShiftedPair& pair,
                                                const PermutationPlan& plan, int threads = 0);

/// Tail proportion: #(values >= observed) / R. Comparison is exact; both
/// sides come from the same summation scheme, so identity-row equality is
/// well defined.
double pvalue(std::span<const double> values, double observed);

/// Reconstruct the label permutation that produced row `row` (for
/// re-evaluation checks). Exhaustive rows return the combination's labels:
/// the split's slot-1 indices ascending, then the complement ascending.
std::vector<std::uint32_t> row_permutation(const JointPermutationDistribution& dist,
                                           std::size_t row);

namespace detail {

/// Drive fn(row, slot1_span) over the plan's rows [begin, end). Each MC row
/// opens its own stream keyed by (seed, row), so any partition of rows over
/// threads replays identically.
template <class Fn>
void for_each_slot1(std::uint32_t n, std::uint32_t n1, const PermutationPlan& plan,
                    std::size_t begin, std::size_t end, Fn&& fn);

std::vector<std::uint32_t> nth_combination(std::uint32_t n, std::uint32_t k, std::uint64_t index);

}  // namespace detail

}  // namespace equiperm

// ---- template implementation ----

namespace equiperm::detail {

template <class Fn>
void for_each_slot1(std::uint32_t n, std::uint32_t n1, const PermutationPlan& plan,
                    std::size_t begin, std::size_t end, Fn&& fn) {
    if (plan.mode == PermutationPlan::Mode::exhaustive) {
        // lexicographic combinations, seeded at `begin` by unranking
        std::vector<std::uint32_t> comb = nth_combination(n, n1, begin);
        for (std::size_t r = begin; r < end; ++r) {
            fn(r, std::span<const std::uint32_t>(comb.data(), n1));
            // advance to the next combination
            if (r + 1 < end) {
                int i = static_cast<int>(n1) - 1;
                while (i >= 0 && comb[static_cast<std::size_t>(i)] ==
                                     n - n1 + static_cast<std::uint32_t>(i))
                    --i;
                if (i < 0) break;
                ++comb[static_cast<std::size_t>(i)];
                for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n1; ++j)
                    comb[j] = comb[j - 1] + 1;
            }
        }
        return;
    }

    std::vector<std::uint32_t> idx(n);
    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0u);
    for (std::size_t r = begin; r < end; ++r) {
        if (plan.include_identity && r == 0) {
            fn(r, std::span<const std::uint32_t>(identity.data(), n1));
            continue;
        }
        idx = identity;
        rng::Stream stream(rng::derive(plan.seed, rng::tag_row, static_cast<std::uint64_t>(r)));
        // partial Fisher-Yates: only the first n1 slots are consumed
        for (std::uint32_t i = 0; i < n1; ++i) {
            std::uint32_t j = i + stream.below(n - i);
            std::swap(idx[i], idx[j]);
        }
        fn(r, std::span<const std::uint32_t>(idx.data(), n1));
    }
}

}  // namespace equiperm::detail
