#pragma once

#include <string>
#include <vector>

#include "equiperm/types.hpp"

namespace equiperm {

/// Built-in datasets from the worked examples:
///   sulfur           - sulfur content of two raw-material batches (20 + 20)
///   log_cmax         - log Cmax bridging study, Japanese (20) vs Caucasian (13)
///   job_satisfaction - extroverted (12) vs introverted (8) workers
struct BuiltinDataset {
    std::string name;
    TwoSampleData data;
};

const BuiltinDataset& builtin_dataset(const std::string& name);

const std::vector<std::string>& builtin_names();

}  // namespace equiperm
