#include "equiperm/datasets.hpp"

#include <array>
#include <stdexcept>

namespace equiperm {

namespace {

std::vector<BuiltinDataset> make_datasets() {
    std::vector<BuiltinDataset> sets;

    // sulfur content of two raw-material batches, 20 per batch
    sets.push_back({"sulfur",
                    {{0.4889, 0.5214, 0.4818, 0.5031, 0.5123, 0.4451, 0.4688, 0.4951,
                      0.4575, 0.4684, 0.5238, 0.4853, 0.4483, 0.4558, 0.5346, 0.4842,
                      0.4851, 0.4726, 0.4818, 0.5257},
                     {0.4823, 0.5073, 0.5165, 0.5154, 0.4622, 0.4671, 0.4853, 0.5426,
                      0.4768, 0.5272, 0.4984, 0.4889, 0.5224, 0.4871, 0.4889, 0.4872,
                      0.4564, 0.4920, 0.5028, 0.5291}}});

    // log Cmax bridging study: 20 Japanese vs 13 Caucasian subjects
    sets.push_back({"log_cmax",
                    {{1.567, 1.515, 1.500, 1.591, 1.624, 1.691, 1.531, 1.456, 1.351, 1.478,
                      1.461, 1.571, 1.565, 1.586, 1.406, 1.488, 1.500, 1.577, 1.500, 1.407},
                     {1.455, 1.375, 1.474, 1.650, 1.464, 1.375, 1.479, 1.413, 1.423, 1.389,
                      1.441, 1.650, 1.348}}});

    // job satisfaction: 12 extroverted vs 8 introverted workers
    sets.push_back({"job_satisfaction",
                    {{66, 57, 81, 62, 61, 60, 73, 59, 80, 55, 67, 70},
                     {64, 58, 45, 43, 37, 56, 44, 42}}});

    return sets;
}

const std::vector<BuiltinDataset>& datasets() {
    static const std::vector<BuiltinDataset> sets = make_datasets();
    return sets;
}

}  // namespace

const BuiltinDataset& builtin_dataset(const std::string& name) {
    for (const auto& set : datasets())
        if (set.name == name) return set;
    throw std::invalid_argument("unknown builtin dataset: " + name +
                                " (expected sulfur, log_cmax or job_satisfaction)");
}

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& set : datasets()) out.push_back(set.name);
        return out;
    }();
    return names;
}

}  // namespace equiperm
