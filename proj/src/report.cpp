#include "equiperm/report.hpp"

#include <chrono>
#include <cmath>
#include <ctime>

#include "equiperm/transform.hpp"
#include "equiperm/version.hpp"

namespace equiperm {

namespace {

nlohmann::json finite_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

const char* alpha_source_name(AlphaSource::Kind kind) {
    switch (kind) {
        case AlphaSource::Kind::naive: return "naive";
        case AlphaSource::Kind::fixed: return "fixed";
        case AlphaSource::Kind::calibrate: return "calibrated";
    }
    return "naive";
}

}  // namespace

std::string RunManifest::now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json to_json(const MarginPair& margins) {
    return {{"eps_lower", finite_or_null(margins.eps_lower)},
            {"eps_upper", finite_or_null(margins.eps_upper)}};
}

nlohmann::json to_json(const PermutationPlan& plan) {
    return {{"mode", plan.mode == PermutationPlan::Mode::exhaustive ? "exhaustive" : "monte_carlo"},
            {"replicates", plan.replicates},
            {"seed", plan.seed},
            {"include_identity", plan.include_identity}};
}

nlohmann::json to_json(const PartialPValues& pvalues) {
    nlohmann::json j;
    j["lambda_lower"] = pvalues.lambda_lower ? nlohmann::json(*pvalues.lambda_lower) : nullptr;
    j["lambda_upper"] = pvalues.lambda_upper ? nlohmann::json(*pvalues.lambda_upper) : nullptr;
    return j;
}

nlohmann::json to_json(const CalibrationSpec& spec) {
    return {{"n1", spec.n1},
            {"n2", spec.n2},
            {"margins", to_json(spec.margins)},
            {"alpha", spec.alpha},
            {"sigma", spec.sigma},
            {"mc_replicates", spec.mc_replicates},
            {"permutations_per_replicate", spec.permutations_per_replicate},
            {"seed", spec.seed},
            {"transform", transform_name(spec.transform)}};
}

nlohmann::json to_json(const CalibrationResult& result) {
    return {{"alpha_c", result.alpha_c},
            {"boundary_used", boundary_used_name(result.boundary_used)},
            {"quantile_mc_error", result.quantile_mc_error},
            {"quantile_warning", result.quantile_warning},
            {"spec", to_json(result.spec)}};
}

nlohmann::json to_json(const IuTestResult& result) {
    nlohmann::json j{{"observed", {{"t_lower", result.observed.first},
                                   {"t_upper", result.observed.second}}},
                     {"pvalues", to_json(result.pvalues)},
                     {"t_global", result.t_global},
                     {"alpha", result.alpha},
                     {"alpha_c", result.alpha_c},
                     {"alpha_c_source", alpha_source_name(result.alpha_c_source)},
                     {"decision", decision_name(result.decision)},
                     {"transform", transform_name(result.transform)},
                     {"margins", to_json(result.margins)},
                     {"plan", to_json(result.plan)},
                     {"degenerate_margins", result.degenerate_margins},
                     {"one_sided", result.one_sided}};
    j["calibration"] = result.calibration ? to_json(*result.calibration) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(const PowerEstimate& estimate) {
    const PowerQuery& q = estimate.query;
    const char* mode = q.mode == PowerQuery::Mode::naive
                           ? "naive"
                           : (q.mode == PowerQuery::Mode::calibrated ? "calibrated"
                                                                     : "auto_calibrate");
    return {{"rejection_rate", estimate.rejection_rate},
            {"mc_standard_error", estimate.mc_standard_error},
            {"alpha_c_used", estimate.alpha_c_used},
            {"query",
             {{"delta", q.delta},
              {"n1", q.n1},
              {"n2", q.n2},
              {"margins", to_json(q.margins)},
              {"alpha", q.alpha},
              {"mode", mode},
              {"sigma", q.sigma},
              {"mc_replicates", q.mc_replicates},
              {"permutations_per_replicate", q.permutations_per_replicate},
              {"seed", q.seed},
              {"transform", transform_name(q.transform)}}}};
}

nlohmann::json to_json(const DesignResult& result) {
    return {{"n_per_group", result.n_per_group},
            {"achieved_power", finite_or_null(result.achieved_power)},
            {"method", result.method == DesignResult::Method::simulation_search
                           ? "simulation_search"
                           : "inverse_square_rule"}};
}

nlohmann::json to_json(const SharpTestResult& result) {
    return {{"statistic_observed", result.statistic_observed},
            {"pvalue", result.pvalue},
            {"sidedness", sidedness_name(result.sidedness)},
            {"plan", to_json(result.plan)}};
}

nlohmann::json to_json(const RunManifest& manifest) {
    return {{"tool", "equiperm"},
            {"version", version_string},
            {"subcommand", manifest.subcommand},
            {"params", manifest.params},
            {"dataset", manifest.dataset},
            {"seed", manifest.seed},
            {"threads", manifest.threads},
            {"timestamp", manifest.timestamp}};
}

nlohmann::json make_report(const RunManifest& manifest, nlohmann::json result) {
    return {{"manifest", to_json(manifest)}, {"result", std::move(result)}};
}

}  // namespace equiperm
