#include "equiperm/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace equiperm {

std::string transform_name(TransformKind kind) {
    switch (kind) {
        case TransformKind::identity: return "identity";
        case TransformKind::log: return "log";
        case TransformKind::sqrt: return "sqrt";
        case TransformKind::midrank: return "midrank";
    }
    return "identity";
}

TransformKind transform_from_name(const std::string& name) {
    if (name == "identity") return TransformKind::identity;
    if (name == "log") return TransformKind::log;
    if (name == "sqrt") return TransformKind::sqrt;
    if (name == "midrank") return TransformKind::midrank;
    throw std::invalid_argument("unknown transform: " + name);
}

ShiftedPair shift_for_margins(const TwoSampleData& data, const MarginPair& margins) {
    data.validate();
    margins.validate();

    ShiftedPair pair;
    pair.n1 = data.n1();
    pair.lower_active = margins.lower_active();
    pair.upper_active = margins.upper_active();

    pair.x_lower.reserve(data.n());
    pair.x_upper.reserve(data.n());
    pair.x_lower.assign(data.sample_a.begin(), data.sample_a.end());
    pair.x_upper.assign(data.sample_a.begin(), data.sample_a.end());
    for (double v : data.sample_b) {
        pair.x_lower.push_back(pair.lower_active ? v + margins.eps_lower : v);
        pair.x_upper.push_back(pair.upper_active ? v - margins.eps_upper : v);
    }
    return pair;
}

std::vector<double> midrank(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // positions i..j (0-based) share the average of ranks i+1..j+1
        double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

std::vector<double> apply_transform(std::span<const double> pooled, TransformKind kind) {
    switch (kind) {
        case TransformKind::identity:
            return std::vector<double>(pooled.begin(), pooled.end());
        case TransformKind::log: {
            std::vector<double> out(pooled.size());
            for (std::size_t i = 0; i < pooled.size(); ++i) {
                if (!(pooled[i] > 0.0))
                    throw std::domain_error("log transform needs strictly positive values: index " +
                                            std::to_string(i) + " is " + std::to_string(pooled[i]));
                out[i] = std::log(pooled[i]);
            }
            return out;
        }
        case TransformKind::sqrt: {
            std::vector<double> out(pooled.size());
            for (std::size_t i = 0; i < pooled.size(); ++i) {
                if (pooled[i] < 0.0)
                    throw std::domain_error("sqrt transform needs non-negative values: index " +
                                            std::to_string(i) + " is " + std::to_string(pooled[i]));
                out[i] = std::sqrt(pooled[i]);
            }
            return out;
        }
        case TransformKind::midrank:
            return midrank(pooled);
    }
    throw std::logic_error("unhandled transform kind");
}

ShiftedPair transform_pair(ShiftedPair pair, TransformKind kind) {
    if (kind == TransformKind::identity) return pair;
    pair.x_lower = apply_transform(pair.x_lower, kind);
    pair.x_upper = apply_transform(pair.x_upper, kind);
    return pair;
}

}  // namespace equiperm
