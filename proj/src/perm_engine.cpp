#include "equiperm/perm_engine.hpp"

#include <limits>
#include <stdexcept>

#include "equiperm/parallel.hpp"

namespace equiperm {

void PermutationPlan::validate() const {
    if (mode == Mode::monte_carlo && replicates < 1)
        throw std::invalid_argument("permutation plan needs R >= 1");
}

std::optional<std::uint64_t> binomial_within(std::uint32_t n, std::uint32_t k, std::uint64_t cap) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 c = 1;
    for (std::uint32_t i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;  // running value is C(n-k+i, i): division exact
        if (c > cap) return std::nullopt;
    }
    return static_cast<std::uint64_t>(c);
}

std::vector<std::uint32_t> draw_permutation(std::uint32_t n, rng::Stream& stream) {
    if (n < 2) throw std::invalid_argument("draw_permutation needs n >= 2");
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    for (std::uint32_t i = 0; i + 1 < n; ++i) {
        std::uint32_t j = i + stream.below(n - i);
        std::swap(idx[i], idx[j]);
    }
    return idx;
}

PairEvaluator::PairEvaluator(const ShiftedPair& pair)
    : xl_(pair.x_lower.data()),
      xu_(pair.x_upper.data()),
      n1_(pair.n1),
      total_lower_(0.0),
      total_upper_(0.0),
      inv_n1_(1.0 / static_cast<double>(pair.n1)),
      inv_n2_(1.0 / static_cast<double>(pair.n2())) {
    // totals accumulate once, ascending; every row reuses them so the pooled
    // sum is identical across rows by construction
    for (std::size_t i = 0; i < pair.x_lower.size(); ++i) total_lower_ += xl_[i];
    for (std::size_t i = 0; i < pair.x_upper.size(); ++i) total_upper_ += xu_[i];
}

std::pair<double, double> PairEvaluator::operator()(std::span<const std::uint32_t> slot1) const {
    double sum_lower = 0.0;
    double sum_upper = 0.0;
    for (std::uint32_t i = 0; i < n1_; ++i) {
        std::uint32_t idx = slot1[i];
        sum_lower += xl_[idx];
        sum_upper += xu_[idx];
    }
    double t_lower = (total_lower_ - sum_lower) * inv_n2_ - sum_lower * inv_n1_;
    double t_upper = sum_upper * inv_n1_ - (total_upper_ - sum_upper) * inv_n2_;
    return {t_lower, t_upper};
}

std::pair<double, double> partial_statistics(const ShiftedPair& pair,
                                             std::span<const std::uint32_t> labels) {
    if (labels.size() != pair.n())
        throw std::invalid_argument("labels must be a permutation of 0..n-1");
    PairEvaluator eval(pair);
    return eval(labels.first(pair.n1));
}

JointPermutationDistribution joint_distribution(const ShiftedPair& pair,
                                                const PermutationPlan& plan, int threads) {
    plan.validate();
    const std::uint32_t n = pair.n();
    const std::uint32_t n1 = pair.n1;
    if (n1 < 1 || n1 >= n) throw std::invalid_argument("shifted pair has an empty group");

    JointPermutationDistribution dist;
    dist.plan = plan;
    dist.n = n;
    dist.n1 = n1;
    dist.lower_active = pair.lower_active;
    dist.upper_active = pair.upper_active;

    PairEvaluator eval(pair);

    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0u);
    auto [obs_lower, obs_upper] = eval(std::span<const std::uint32_t>(identity.data(), n1));
    dist.observed_lower = obs_lower;
    dist.observed_upper = obs_upper;

    std::size_t rows;
    if (plan.mode == PermutationPlan::Mode::exhaustive) {
        auto count = binomial_within(n, n1, PermutationPlan::enumeration_cap);
        if (!count)
            throw std::invalid_argument("exhaustive enumeration exceeds the cap of " +
                                        std::to_string(PermutationPlan::enumeration_cap) +
                                        " group splits");
        rows = static_cast<std::size_t>(*count);
        dist.plan.replicates = *count;
    } else {
        rows = static_cast<std::size_t>(plan.replicates);
    }

    dist.t_lower.resize(rows);
    dist.t_upper.resize(rows);
    parallel_for(rows, threads, [&](std::size_t begin, std::size_t end) {
        detail::for_each_slot1(n, n1, dist.plan, begin, end,
                               [&](std::size_t r, std::span<const std::uint32_t> slot1) {
                                   auto [tl, tu] = eval(slot1);
                                   dist.t_lower[r] = tl;
                                   dist.t_upper[r] = tu;
                               });
    });
    return dist;
}

double pvalue(std::span<const double> values, double observed) {
    if (values.empty()) throw std::invalid_argument("pvalue needs at least one replicate");
    std::size_t count = 0;
    for (double v : values)
        if (v >= observed) ++count;
    return static_cast<double>(count) / static_cast<double>(values.size());
}

std::vector<std::uint32_t> row_permutation(const JointPermutationDistribution& dist,
                                           std::size_t row) {
    if (row >= dist.rows()) throw std::out_of_range("row out of range");
    const std::uint32_t n = dist.n;
    const std::uint32_t n1 = dist.n1;

    if (dist.plan.mode == PermutationPlan::Mode::exhaustive) {
        std::vector<std::uint32_t> comb = detail::nth_combination(n, n1, row);
        std::vector<std::uint32_t> labels;
        labels.reserve(n);
        labels.assign(comb.begin(), comb.end());
        std::vector<bool> used(n, false);
        for (std::uint32_t v : comb) used[v] = true;
        for (std::uint32_t v = 0; v < n; ++v)
            if (!used[v]) labels.push_back(v);
        return labels;
    }

    if (dist.plan.include_identity && row == 0) {
        std::vector<std::uint32_t> labels(n);
        std::iota(labels.begin(), labels.end(), 0u);
        return labels;
    }
    rng::Stream stream(rng::derive(dist.plan.seed, rng::tag_row, static_cast<std::uint64_t>(row)));
    return draw_permutation(n, stream);
}

namespace detail {

std::vector<std::uint32_t> nth_combination(std::uint32_t n, std::uint32_t k, std::uint64_t index) {
    // combinatorial number system: lexicographic unranking
    std::vector<std::uint32_t> comb(k);
    std::uint32_t value = 0;
    for (std::uint32_t slot = 0; slot < k; ++slot) {
        for (;; ++value) {
            auto rest = binomial_within(n - value - 1, k - slot - 1,
                                        std::numeric_limits<std::uint64_t>::max() / 2);
            std::uint64_t block = rest.value_or(0);
            if (index < block) break;
            index -= block;
        }
        comb[slot] = value;
        ++value;
    }
    return comb;
}

}  // namespace detail

}  // namespace equiperm
