#pragma once

#include <span>
#include <vector>

#include "equiperm/types.hpp"

namespace equiperm {

/// Build the two margin-shifted pooled vectors. Shifts happen in raw
/// observation units; any measurement-scale transform is applied afterwards
/// (transform_pair), and separately to each shifted vector. This order is
/// what keeps margins in the physical units of the data.
ShiftedPair shift_for_margins(const TwoSampleData& data, const MarginPair& margins);

/// Elementwise transform of one pooled vector; midrank ranks the whole
/// vector, ties receiving the average of the ranks they span.
/// log requires strictly positive input, sqrt non-negative; violations
/// report the first offending index.
std::vector<double> apply_transform(std::span<const double> pooled, TransformKind kind);

/// Mid-ranks of a vector (1-based; tied values share the average rank).
std::vector<double> midrank(std::span<const double> values);

/// Apply the transform to both sides of a shifted pair.
ShiftedPair transform_pair(ShiftedPair pair, TransformKind kind);

}  // namespace equiperm
