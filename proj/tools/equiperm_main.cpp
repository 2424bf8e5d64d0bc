#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "equiperm/aux_tests.hpp"
#include "equiperm/calibrate.hpp"
#include "equiperm/datasets.hpp"
#include "equiperm/iu_test.hpp"
#include "equiperm/parallel.hpp"
#include "equiperm/power_design.hpp"
#include "equiperm/report.hpp"
#include "equiperm/transform.hpp"
#include "equiperm/version.hpp"
#include "csv_io.hpp"
#include "reproduce.hpp"

namespace {

using namespace equiperm;
using nlohmann::json;

void write_output(const json& document, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << document.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write output file: " + out_path);
        out << document.dump(2) << "\n";
    }
}

struct DataArgs {
    std::string builtin;
    std::string csv_path;
    std::string data1_path;
    std::string data2_path;

    TwoSampleData load(json& dataset_meta) const {
        if (!builtin.empty()) {
            const BuiltinDataset& set = builtin_dataset(builtin);
            dataset_meta = {{"source", "builtin"},
                            {"name", set.name},
                            {"n1", set.data.n1()},
                            {"n2", set.data.n2()}};
            return set.data;
        }
        if (!csv_path.empty()) {
            TwoSampleData data = cli::read_grouped_csv(csv_path);
            dataset_meta = {{"source", "csv"},
                            {"path", csv_path},
                            {"n1", data.n1()},
                            {"n2", data.n2()}};
            return data;
        }
        if (!data1_path.empty() && !data2_path.empty()) {
            TwoSampleData data{cli::read_value_column(data1_path),
                               cli::read_value_column(data2_path)};
            try {
                data.validate();
            } catch (const std::invalid_argument& e) {
                throw cli::DataError(std::string(e.what()));
            }
            dataset_meta = {{"source", "csv"},
                            {"path1", data1_path},
                            {"path2", data2_path},
                            {"n1", data.n1()},
                            {"n2", data.n2()}};
            return data;
        }
        throw CLI::ValidationError(
            "data", "provide --builtin <name>, --data <csv>, or --data1/--data2");
    }
};

AlphaSource parse_alpha_source(const std::string& mode, const TwoSampleData& data,
                               const MarginPair& margins, double alpha, double sigma_flag,
                               TransformKind transform, std::uint32_t mc,
                               std::uint32_t calib_permutations, std::uint64_t seed) {
    if (mode == "naive") return AlphaSource::naive();
    if (mode.rfind("fixed=", 0) == 0) {
        double value = std::stod(mode.substr(6));
        return AlphaSource::fixed(value);
    }
    if (mode == "auto") {
        CalibrationSpec spec;
        spec.n1 = data.n1();
        spec.n2 = data.n2();
        spec.margins = margins;
        spec.alpha = alpha;
        spec.sigma = std::isnan(sigma_flag) ? pooled_sigma(data) : sigma_flag;
        spec.mc_replicates = mc;
        spec.permutations_per_replicate = calib_permutations;
        spec.seed = rng::derive(seed, rng::tag_calibration);
        spec.transform = transform;
        return AlphaSource::calibrated(spec);
    }
    throw CLI::ValidationError("--calibrate", "expected auto, naive or fixed=<value>");
}

// ---- subcommand option bags ----

struct IutestArgs {
    DataArgs data;
    double eps_lower = 0, eps_upper = 0;
    double alpha = 0.05;
    std::string transform = "identity";
    std::uint64_t permutations = 100000;
    bool exhaustive = false;
    bool include_identity = false;
    std::string calibrate_mode = "naive";
    std::uint32_t mc = 5000;
    std::uint32_t calib_permutations = 2500;
    double sigma = std::nan("");
    std::uint64_t seed = 42;
    int threads = 0;
    std::string out;
};

int run_iutest_cmd(const IutestArgs& args) {
    json dataset_meta;
    TwoSampleData data = args.data.load(dataset_meta);
    MarginPair margins{args.eps_lower, args.eps_upper};
    TransformKind transform = transform_from_name(args.transform);

    PermutationPlan plan =
        args.exhaustive
            ? PermutationPlan::exhaustive()
            : PermutationPlan::monte_carlo(args.permutations, args.seed, args.include_identity);

    AlphaSource source =
        parse_alpha_source(args.calibrate_mode, data, margins, args.alpha, args.sigma, transform,
                           args.mc, args.calib_permutations, args.seed);

    IuTestResult result =
        run_iu_test(data, margins, args.alpha, transform, plan, source, args.threads);

    RunManifest manifest;
    manifest.subcommand = "iutest";
    manifest.params = {{"eps_lower", args.eps_lower},
                       {"eps_upper", args.eps_upper},
                       {"alpha", args.alpha},
                       {"transform", args.transform},
                       {"permutations", args.permutations},
                       {"exhaustive", args.exhaustive},
                       {"include_identity", args.include_identity},
                       {"calibrate", args.calibrate_mode},
                       {"mc", args.mc},
                       {"calib_permutations", args.calib_permutations},
                       {"sigma", std::isnan(args.sigma) ? json(nullptr) : json(args.sigma)}};
    manifest.dataset = dataset_meta;
    manifest.seed = args.seed;
    manifest.threads = effective_threads(args.threads);
    manifest.timestamp = RunManifest::now_iso8601();

    write_output(make_report(manifest, to_json(result)), args.out);

    std::cerr << "IU-NPC: lambda_G = " << result.t_global << " (lambda_I = "
              << (result.pvalues.lambda_lower ? std::to_string(*result.pvalues.lambda_lower)
                                              : "inactive")
              << ", lambda_S = "
              << (result.pvalues.lambda_upper ? std::to_string(*result.pvalues.lambda_upper)
                                              : "inactive")
              << "), alpha_c = " << result.alpha_c << " -> " << decision_name(result.decision)
              << "\n";
    if (result.degenerate_margins)
        std::cerr << "note: both margins are zero, H1 is empty; decision forced to "
                     "NonEquivalence\n";
    return 0;
}

struct CalibrateArgs {
    std::uint32_t n1 = 0, n2 = 0;
    double eps_lower = 0, eps_upper = 0;
    double sigma = 1.0;
    double alpha = 0.05;
    std::uint32_t mc = 5000;
    std::uint32_t permutations = 2500;
    std::string transform = "identity";
    std::uint64_t seed = 42;
    int threads = 0;
    std::string out;
};

int run_calibrate_cmd(const CalibrateArgs& args) {
    CalibrationSpec spec;
    spec.n1 = args.n1;
    spec.n2 = args.n2;
    spec.margins = {args.eps_lower, args.eps_upper};
    spec.alpha = args.alpha;
    spec.sigma = args.sigma;
    spec.mc_replicates = args.mc;
    spec.permutations_per_replicate = args.permutations;
    spec.seed = args.seed;
    spec.transform = transform_from_name(args.transform);

    CalibrationResult result = calibrate_alpha(spec, args.threads);

    RunManifest manifest;
    manifest.subcommand = "calibrate";
    manifest.params = to_json(spec);
    manifest.dataset = {{"source", "none"}};
    manifest.seed = args.seed;
    manifest.threads = effective_threads(args.threads);
    manifest.timestamp = RunManifest::now_iso8601();

    write_output(make_report(manifest, to_json(result)), args.out);
    std::cerr << "calibrated alpha_c = " << result.alpha_c << " (boundary "
              << boundary_used_name(result.boundary_used) << ", mc error "
              << result.quantile_mc_error << ")\n";
    if (result.quantile_warning)
        std::cerr << "warning: ceil(alpha*MC) < 10; increase --mc for a stable quantile\n";
    return 0;
}

struct PowerArgs {
    double delta = 0.0;
    bool delta_set = false;
    std::string delta_grid;
    std::uint32_t n1 = 0, n2 = 0;
    double eps_lower = 0, eps_upper = 0;
    double alpha = 0.05;
    std::string mode = "auto";
    double sigma = 1.0;
    std::uint32_t mc = 5000;
    std::uint32_t permutations = 2500;
    std::string transform = "identity";
    std::uint64_t seed = 42;
    int threads = 0;
    std::string out;
};

PowerQuery make_power_query(const PowerArgs& args, double delta) {
    PowerQuery query;
    query.delta = delta;
    query.n1 = args.n1;
    query.n2 = args.n2;
    query.margins = {args.eps_lower, args.eps_upper};
    query.alpha = args.alpha;
    if (args.mode == "naive") {
        query.mode = PowerQuery::Mode::naive;
    } else if (args.mode == "auto") {
        query.mode = PowerQuery::Mode::auto_calibrate;
    } else if (args.mode.rfind("calibrated=", 0) == 0) {
        query.mode = PowerQuery::Mode::calibrated;
        query.alpha_c_fixed = std::stod(args.mode.substr(11));
    } else {
        throw CLI::ValidationError("--mode", "expected naive, auto or calibrated=<value>");
    }
    query.sigma = args.sigma;
    query.mc_replicates = args.mc;
    query.permutations_per_replicate = args.permutations;
    query.seed = args.seed;
    query.transform = transform_from_name(args.transform);
    return query;
}

int run_power_cmd(const PowerArgs& args) {
    if (!args.delta_grid.empty()) {
        // grid mode emits plot-ready CSV: delta, rejection_rate, mc_se
        double lo, hi, step;
        if (std::sscanf(args.delta_grid.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 ||
            !(step > 0))
            throw CLI::ValidationError("--delta-grid", "expected a:b:step with step > 0");
        std::ostringstream csv;
        csv << "delta,rejection_rate,mc_se\n";
        // threshold resolved once so the whole profile uses one alpha_c
        PowerQuery base = make_power_query(args, lo);
        PowerEstimate first = estimate_power(base, args.threads);
        double alpha_c = first.alpha_c_used;
        csv << first.query.delta << ',' << first.rejection_rate << ','
            << first.mc_standard_error << '\n';
        for (double d = lo + step; d <= hi + 1e-12; d += step) {
            PowerQuery query = make_power_query(args, d);
            query.mode = PowerQuery::Mode::calibrated;
            query.alpha_c_fixed = alpha_c;
            PowerEstimate estimate = estimate_power(query, args.threads);
            csv << estimate.query.delta << ',' << estimate.rejection_rate << ','
                << estimate.mc_standard_error << '\n';
        }
        if (args.out.empty()) {
            std::cout << csv.str();
        } else {
            std::ofstream out(args.out);
            if (!out) throw std::runtime_error("cannot write output file: " + args.out);
            out << csv.str();
        }
        return 0;
    }

    PowerEstimate estimate = estimate_power(make_power_query(args, args.delta), args.threads);

    RunManifest manifest;
    manifest.subcommand = "power";
    manifest.params = {{"delta", args.delta},      {"n1", args.n1},
                       {"n2", args.n2},            {"eps_lower", args.eps_lower},
                       {"eps_upper", args.eps_upper}, {"alpha", args.alpha},
                       {"mode", args.mode},        {"sigma", args.sigma},
                       {"mc", args.mc},            {"permutations", args.permutations},
                       {"transform", args.transform}};
    manifest.dataset = {{"source", "none"}};
    manifest.seed = args.seed;
    manifest.threads = effective_threads(args.threads);
    manifest.timestamp = RunManifest::now_iso8601();

    write_output(make_report(manifest, to_json(estimate)), args.out);
    std::cerr << "rejection rate at delta = " << args.delta << ": " << estimate.rejection_rate
              << " +- " << estimate.mc_standard_error << " (alpha_c = " << estimate.alpha_c_used
              << ")\n";
    return 0;
}

struct DesignArgs {
    double eps = 0;
    double alpha = 0.05;
    double power = 0.8;
    double sigma = 1.0;
    std::string rule = "simulation";
    double n_at_unit = 17.38;
    std::uint32_t mc = 5000;
    std::uint32_t permutations = 2500;
    std::uint32_t max_n = 10000;
    std::uint64_t seed = 42;
    int threads = 0;
    std::string out;
};

int run_design_cmd(const DesignArgs& args) {
    DesignResult result;
    if (args.rule == "inverse-square") {
        result = inverse_square_design(args.eps, args.n_at_unit);
    } else if (args.rule == "simulation") {
        DesignSearchSpec spec;
        spec.target_power = args.power;
        spec.margins = {args.eps, args.eps};
        spec.alpha = args.alpha;
        spec.sigma = args.sigma;
        spec.mc_replicates = args.mc;
        spec.permutations_per_replicate = args.permutations;
        spec.seed = args.seed;
        spec.n_cap = args.max_n;
        result = find_design(spec, args.threads);
    } else {
        throw CLI::ValidationError("--rule", "expected simulation or inverse-square");
    }

    RunManifest manifest;
    manifest.subcommand = "design";
    manifest.params = {{"eps", args.eps},   {"alpha", args.alpha},
                       {"power", args.power}, {"sigma", args.sigma},
                       {"rule", args.rule}, {"n_at_unit", args.n_at_unit},
                       {"mc", args.mc},     {"permutations", args.permutations},
                       {"max_n", args.max_n}};
    manifest.dataset = {{"source", "none"}};
    manifest.seed = args.seed;
    manifest.threads = effective_threads(args.threads);
    manifest.timestamp = RunManifest::now_iso8601();

    write_output(make_report(manifest, to_json(result)), args.out);
    std::cerr << "design: n per group = " << result.n_per_group;
    if (!std::isnan(result.achieved_power))
        std::cerr << " (achieved power " << result.achieved_power << ")";
    std::cerr << "\n";
    return 0;
}

struct DatasetArgs {
    std::string name;
    bool dump = false;
    std::string out;
};

int run_dataset_cmd(const DatasetArgs& args) {
    const BuiltinDataset& set = builtin_dataset(args.name);
    if (args.dump) {
        std::string csv = cli::dump_grouped_csv(set.data);
        if (args.out.empty()) {
            std::cout << csv;
        } else {
            std::ofstream out(args.out);
            if (!out) throw std::runtime_error("cannot write output file: " + args.out);
            out << csv;
        }
    } else {
        std::cout << set.name << ": n1 = " << set.data.n1() << ", n2 = " << set.data.n2() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"equiperm: intersection-union permutation tests for two-sample equivalence"};
    app.set_version_flag("--version", equiperm::version_string);
    app.require_subcommand(1);

    IutestArgs iutest_args;
    auto* iutest = app.add_subcommand("iutest", "run the IU-NPC equivalence test");
    iutest->add_option("--builtin", iutest_args.data.builtin, "builtin dataset name");
    iutest->add_option("--data", iutest_args.data.csv_path, "CSV file (group,value; groups 1/2)");
    iutest->add_option("--data1", iutest_args.data.data1_path, "one-column file for sample 1");
    iutest->add_option("--data2", iutest_args.data.data2_path, "one-column file for sample 2");
    iutest->add_option("--eps-lower", iutest_args.eps_lower, "non-inferiority margin (>= 0, inf allowed)")
        ->required();
    iutest->add_option("--eps-upper", iutest_args.eps_upper, "non-superiority margin (>= 0, inf allowed)")
        ->required();
    iutest->add_option("--alpha", iutest_args.alpha, "global level (default 0.05)");
    iutest->add_option("--transform", iutest_args.transform,
                       "identity | log | sqrt | midrank (default identity)");
    iutest->add_option("--permutations", iutest_args.permutations, "R (default 100000)");
    iutest->add_flag("--exhaustive", iutest_args.exhaustive,
                     "enumerate all group splits instead of sampling");
    iutest->add_flag("--include-identity", iutest_args.include_identity,
                     "make row 0 the identity permutation (guarantees lambda >= 1/R)");
    iutest->add_option("--calibrate", iutest_args.calibrate_mode,
                       "auto | naive | fixed=<value> (default naive)");
    iutest->add_option("--mc", iutest_args.mc, "calibration MC replicates (default 5000)");
    iutest->add_option("--calib-permutations", iutest_args.calib_permutations,
                       "permutations per calibration replicate (default 2500)");
    iutest->add_option("--sigma", iutest_args.sigma,
                       "working-model sigma for auto calibration (default: pooled)");
    iutest->add_option("--seed", iutest_args.seed, "RNG seed")->envname("EQUIPERM_SEED");
    iutest->add_option("--threads", iutest_args.threads, "worker threads (0 = all cores)");
    iutest->add_option("--out", iutest_args.out, "write JSON here instead of stdout");

    CalibrateArgs calibrate_args;
    auto* calibrate = app.add_subcommand("calibrate", "Monte Carlo calibration of alpha_c");
    calibrate->add_option("--n1", calibrate_args.n1, "group 1 size")->required();
    calibrate->add_option("--n2", calibrate_args.n2, "group 2 size")->required();
    calibrate->add_option("--eps-lower", calibrate_args.eps_lower, "non-inferiority margin")
        ->required();
    calibrate->add_option("--eps-upper", calibrate_args.eps_upper, "non-superiority margin")
        ->required();
    calibrate->add_option("--sigma", calibrate_args.sigma, "working-model sigma")->required();
    calibrate->add_option("--alpha", calibrate_args.alpha, "global level (default 0.05)");
    calibrate->add_option("--mc", calibrate_args.mc, "MC replicates (default 5000)");
    calibrate->add_option("--permutations", calibrate_args.permutations,
                          "permutations per replicate (default 2500)");
    calibrate->add_option("--transform", calibrate_args.transform, "transform (default identity)");
    calibrate->add_option("--seed", calibrate_args.seed, "RNG seed")->envname("EQUIPERM_SEED");
    calibrate->add_option("--threads", calibrate_args.threads, "worker threads");
    calibrate->add_option("--out", calibrate_args.out, "write JSON here instead of stdout");

    PowerArgs power_args;
    auto* power = app.add_subcommand("power", "rejection probability at a true effect");
    auto* delta_opt = power->add_option("--delta", power_args.delta, "true effect delta");
    power->add_option("--delta-grid", power_args.delta_grid,
                      "a:b:step grid; emits CSV (delta, rejection_rate, mc_se)");
    power->add_option("--n1", power_args.n1, "group 1 size")->required();
    power->add_option("--n2", power_args.n2, "group 2 size")->required();
    power->add_option("--eps-lower", power_args.eps_lower, "non-inferiority margin")->required();
    power->add_option("--eps-upper", power_args.eps_upper, "non-superiority margin")->required();
    power->add_option("--alpha", power_args.alpha, "global level (default 0.05)");
    power->add_option("--mode", power_args.mode, "naive | auto | calibrated=<value> (default auto)");
    power->add_option("--sigma", power_args.sigma, "data sigma (default 1)");
    power->add_option("--mc", power_args.mc, "MC replicates (default 5000)");
    power->add_option("--permutations", power_args.permutations,
                      "permutations per replicate (default 2500)");
    power->add_option("--transform", power_args.transform, "transform (default identity)");
    power->add_option("--seed", power_args.seed, "RNG seed")->envname("EQUIPERM_SEED");
    power->add_option("--threads", power_args.threads, "worker threads");
    power->add_option("--out", power_args.out, "output path");

    DesignArgs design_args;
    auto* design = app.add_subcommand("design", "sample-size design for target power");
    design->add_option("--eps", design_args.eps, "symmetric margin")->required();
    design->add_option("--alpha", design_args.alpha, "global level (default 0.05)");
    design->add_option("--power", design_args.power, "target power (default 0.8)");
    design->add_option("--sigma", design_args.sigma, "data sigma (default 1)");
    design->add_option("--rule", design_args.rule,
                       "simulation | inverse-square (default simulation)");
    design->add_option("--n-at-unit", design_args.n_at_unit,
                       "fitted n at eps = 1 for the inverse-square rule (default 17.38)");
    design->add_option("--mc", design_args.mc, "MC replicates per point (default 5000)");
    design->add_option("--permutations", design_args.permutations,
                       "permutations per replicate (default 2500)");
    design->add_option("--max-n", design_args.max_n, "search cap (default 10000)");
    design->add_option("--seed", design_args.seed, "RNG seed")->envname("EQUIPERM_SEED");
    design->add_option("--threads", design_args.threads, "worker threads");
    design->add_option("--out", design_args.out, "write JSON here instead of stdout");

    equiperm::cli::ReproduceOptions reproduce_options;
    auto* reproduce = app.add_subcommand("reproduce", "side-by-side reproduction reports");
    reproduce
        ->add_option("target", reproduce_options.target,
                     "table2 | table3 | designs | example1 | example2 | example3")
        ->required();
    reproduce->add_flag("--fast", reproduce_options.fast,
                        "reduced MC/R smoke run with widened tolerances");
    reproduce->add_option("--seed", reproduce_options.seed, "RNG seed")->envname("EQUIPERM_SEED");
    reproduce->add_option("--threads", reproduce_options.threads, "worker threads");
    reproduce->add_option("--out", reproduce_options.out_csv, "also write the report as CSV");

    DatasetArgs dataset_args;
    auto* dataset = app.add_subcommand("dataset", "inspect builtin datasets");
    dataset->add_option("--name", dataset_args.name, "sulfur | log_cmax | job_satisfaction")
        ->required();
    dataset->add_flag("--dump", dataset_args.dump, "print as group,value CSV");
    dataset->add_option("--out", dataset_args.out, "write the dump here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (app.got_subcommand(iutest)) return run_iutest_cmd(iutest_args);
        if (app.got_subcommand(calibrate)) return run_calibrate_cmd(calibrate_args);
        if (app.got_subcommand(power)) {
            power_args.delta_set = delta_opt->count() > 0;
            if (!power_args.delta_set && power_args.delta_grid.empty())
                throw CLI::ValidationError("--delta", "provide --delta or --delta-grid");
            return run_power_cmd(power_args);
        }
        if (app.got_subcommand(design)) return run_design_cmd(design_args);
        if (app.got_subcommand(reproduce)) return equiperm::cli::run_reproduce(reproduce_options);
        if (app.got_subcommand(dataset)) return run_dataset_cmd(dataset_args);
    } catch (const equiperm::cli::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
