#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace equiperm {

/// The observed two-sample dataset (sample_a = group 1, sample_b = group 2),
/// stored in observation units and original order.
struct TwoSampleData {
    std::vector<double> sample_a;
    std::vector<double> sample_b;

    std::uint32_t n1() const { return static_cast<std::uint32_t>(sample_a.size()); }
    std::uint32_t n2() const { return static_cast<std::uint32_t>(sample_b.size()); }
    std::uint32_t n() const { return n1() + n2(); }

    /// n1 >= 2, n2 >= 2, all entries finite.
    void validate() const {
        if (sample_a.size() < 2 || sample_b.size() < 2)
            throw std::invalid_argument("two-sample data needs at least 2 observations per group");
        for (double v : sample_a)
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite observation in sample_a");
        for (double v : sample_b)
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite observation in sample_b");
    }
};

/// Non-inferiority / non-superiority margins in observation units.
/// An infinite margin deactivates that side (one-sided problem);
/// at most one side may be infinite.
struct MarginPair {
    double eps_lower = 0.0;  // margin below (non-inferiority side)
    double eps_upper = 0.0;  // margin above (non-superiority side)

    bool lower_active() const { return std::isfinite(eps_lower); }
    bool upper_active() const { return std::isfinite(eps_upper); }
    bool degenerate() const { return eps_lower == 0.0 && eps_upper == 0.0; }
    bool symmetric() const { return lower_active() && upper_active() && eps_lower == eps_upper; }

    void validate() const {
        if (std::isnan(eps_lower) || std::isnan(eps_upper))
            throw std::invalid_argument("margin is NaN");
        if (eps_lower < 0.0 || eps_upper < 0.0)
            throw std::invalid_argument("margins must be non-negative");
        if (!lower_active() && !upper_active())
            throw std::invalid_argument("both margins infinite: nothing to test");
    }
};

/// Measurement-scale transform applied to each pooled margin-shifted vector.
enum class TransformKind { identity, log, sqrt, midrank };

std::string transform_name(TransformKind kind);
TransformKind transform_from_name(const std::string& name);

/// The two pooled margin-shifted vectors: x_lower = (Y1, Y2 + eps_lower),
/// x_upper = (Y1, Y2 - eps_upper). An inactive side holds the unshifted data.
struct ShiftedPair {
    std::vector<double> x_lower;
    std::vector<double> x_upper;
    std::uint32_t n1 = 0;
    bool lower_active = true;
    bool upper_active = true;

    std::uint32_t n() const { return static_cast<std::uint32_t>(x_lower.size()); }
    std::uint32_t n2() const { return n() - n1; }
};

enum class Decision { equivalence, non_equivalence };

inline const char* decision_name(Decision d) {
    return d == Decision::equivalence ? "Equivalence" : "NonEquivalence";
}

}  // namespace equiperm
