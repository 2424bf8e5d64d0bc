#pragma once

#include <string>

#include <json.hpp>

#include "equiperm/aux_tests.hpp"
#include "equiperm/calibrate.hpp"
#include "equiperm/iu_test.hpp"
#include "equiperm/power_design.hpp"

namespace equiperm {

/// Everything needed to reproduce a CLI run bit-exactly. The timestamp is
/// informational only and excluded from the determinism contract.
struct RunManifest {
    std::string subcommand;
    nlohmann::json params;   // resolved flag values
    nlohmann::json dataset;  // {"source": "builtin"|"csv"|"none", ...}
    std::uint64_t seed = 0;
    int threads = 0;
    std::string timestamp;  // ISO-8601, UTC

    static std::string now_iso8601();
};

nlohmann::json to_json(const MarginPair& margins);
nlohmann::json to_json(const PermutationPlan& plan);
nlohmann::json to_json(const PartialPValues& pvalues);
nlohmann::json to_json(const CalibrationSpec& spec);
nlohmann::json to_json(const CalibrationResult& result);
nlohmann::json to_json(const IuTestResult& result);
nlohmann::json to_json(const PowerEstimate& estimate);
nlohmann::json to_json(const DesignResult& result);
nlohmann::json to_json(const SharpTestResult& result);
nlohmann::json to_json(const RunManifest& manifest);

/// Assemble the full document emitted by the CLI.
nlohmann::json make_report(const RunManifest& manifest, nlohmann::json result);

}  // namespace equiperm
