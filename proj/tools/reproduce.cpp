#include "reproduce.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <vector>

#include "equiperm/aux_tests.hpp"
#include "equiperm/calibrate.hpp"
#include "equiperm/datasets.hpp"
#include "equiperm/iu_test.hpp"
#include "equiperm/power_design.hpp"
#include "equiperm/rng.hpp"

namespace equiperm::cli {

namespace {

struct Row {
    std::string cell;
    double published;
    double reproduced;
    double tolerance;
    bool pass;
    std::string note;
};

std::string fmt(double v, int digits = 4) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

class Report {
public:
    explicit Report(bool fast) : fast_(fast) {}

    void add(std::string cell, double published, double reproduced, double tolerance,
             std::string note = "") {
        if (fast_) tolerance *= 3.0;
        bool pass = std::abs(reproduced - published) <= tolerance;
        rows_.push_back({std::move(cell), published, reproduced, tolerance, pass, std::move(note)});
        const Row& r = rows_.back();
        std::cerr << "  [" << (r.pass ? "ok" : "MISMATCH") << "] " << r.cell << ": published "
                  << fmt(r.published) << ", reproduced " << fmt(r.reproduced) << "\n";
    }

    /// exact integer cell (tolerance expressed in the same units)
    void add_exact(std::string cell, double published, double reproduced, double tolerance,
                   std::string note = "") {
        bool pass = std::abs(reproduced - published) <= tolerance;
        rows_.push_back({std::move(cell), published, reproduced, tolerance, pass, std::move(note)});
        const Row& r = rows_.back();
        std::cerr << "  [" << (r.pass ? "ok" : "MISMATCH") << "] " << r.cell << ": published "
                  << fmt(r.published) << ", reproduced " << fmt(r.reproduced) << "\n";
    }

    void print_markdown(std::ostream& out, const std::string& title) const {
        out << "# Reproduction report: " << title << (fast_ ? " (fast mode, tolerances x3)" : "")
            << "\n\n";
        out << "| cell | published | reproduced | tolerance | verdict | note |\n";
        out << "|------|-------|------------|-----------|---------|------|\n";
        for (const Row& r : rows_) {
            out << "| " << r.cell << " | " << fmt(r.published) << " | " << fmt(r.reproduced) << " | "
                << fmt(r.tolerance, 3) << " | " << (r.pass ? "ok" : "MISMATCH") << " | " << r.note
                << " |\n";
        }
        std::size_t failed = 0;
        for (const Row& r : rows_)
            if (!r.pass) ++failed;
        out << "\n" << rows_.size() - failed << "/" << rows_.size() << " cells within tolerance\n";
    }

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        out << "cell,published,reproduced,tolerance,verdict,note\n";
        for (const Row& r : rows_) {
            out << '"' << r.cell << "\"," << fmt(r.published, 10) << ',' << fmt(r.reproduced, 10)
                << ',' << fmt(r.tolerance, 10) << ',' << (r.pass ? "ok" : "MISMATCH") << ",\""
                << r.note << "\"\n";
        }
    }

private:
    bool fast_;
    std::vector<Row> rows_;
};

struct ExampleTargets {
    const char* dataset;
    double sharp_two_sided;
    double sharp_tolerance;
    std::vector<std::pair<double, double>> iu;       // (margin, published lambda_G)
    std::vector<std::pair<double, double>> midrank;  // (margin, published lambda_RG)
    double iu_tolerance;
};

void run_example(Report& report, const ExampleTargets& targets, std::uint64_t r_perm,
                 std::uint64_t seed, int threads) {
    const TwoSampleData& data = builtin_dataset(targets.dataset).data;

    auto sharp = sharp_permutation_test(
        data, Sidedness::two_sided,
        PermutationPlan::monte_carlo(r_perm, rng::derive(seed, 1)), threads);
    report.add("sharp two-sided lambda", targets.sharp_two_sided, sharp.pvalue,
               targets.sharp_tolerance);

    std::uint64_t run = 0;
    for (auto [eps, published] : targets.iu) {
        auto stats = compute_iu_statistics(
            data, MarginPair{eps, eps}, TransformKind::identity,
            PermutationPlan::monte_carlo(r_perm, rng::derive(seed, 2, ++run)), threads);
        report.add("IU lambda_G, eps=" + fmt(eps), published, stats.t_global, targets.iu_tolerance);
    }
    for (auto [eps, published] : targets.midrank) {
        auto stats = compute_iu_statistics(
            data, MarginPair{eps, eps}, TransformKind::midrank,
            PermutationPlan::monte_carlo(r_perm, rng::derive(seed, 3, ++run)), threads);
        report.add("mid-rank lambda_RG, eps=" + fmt(eps), published, stats.t_global,
                   targets.iu_tolerance);
    }
}

void run_table2(Report& report, bool fast, std::uint64_t seed, int threads) {
    const std::uint32_t mc = fast ? 1500 : 10000;
    const std::uint32_t r = fast ? 800 : 5000;
    struct Cell {
        double eps, alpha_c, power_calibrated, power_naive;
    };
    const std::vector<Cell> cells = {
        {0.80, 0.060, 0.301, 0.235}, {0.40, 0.185, 0.076, 0.001},
        {0.333, 0.225, 0.066, 0.000}, {0.20, 0.337, 0.059, 0.000},
        {0.10, 0.428, 0.052, 0.000}, {0.02, 0.504, 0.051, 0.000},
        {0.01, 0.513, 0.0505, 0.000}, {0.001, 0.523, 0.0502, 0.000}};

    std::uint64_t run = 0;
    for (const Cell& cell : cells) {
        std::cerr << "table2: eps = " << fmt(cell.eps) << "...\n";
        CalibrationSpec spec;
        spec.n1 = spec.n2 = 12;
        spec.margins = {cell.eps, cell.eps};
        spec.alpha = 0.05;
        spec.sigma = 1.0;
        spec.mc_replicates = mc;
        spec.permutations_per_replicate = r;
        spec.seed = rng::derive(seed, 10, ++run);
        CalibrationResult calibration = calibrate_alpha(spec, threads);
        report.add("alpha_c, eps=" + fmt(cell.eps), cell.alpha_c, calibration.alpha_c, 0.015);

        PowerQuery query;
        query.delta = 0.0;
        query.n1 = query.n2 = 12;
        query.margins = spec.margins;
        query.alpha = 0.05;
        query.mode = PowerQuery::Mode::calibrated;
        query.alpha_c_fixed = calibration.alpha_c;
        query.sigma = 1.0;
        query.mc_replicates = mc;
        query.permutations_per_replicate = r;
        query.seed = rng::derive(seed, 11, run);
        PowerEstimate calibrated = estimate_power(query, threads);
        report.add("calibrated power, eps=" + fmt(cell.eps), cell.power_calibrated,
                   calibrated.rejection_rate, 0.02);

        query.mode = PowerQuery::Mode::naive;
        PowerEstimate naive = estimate_power(query, threads);
        report.add("naive power, eps=" + fmt(cell.eps), cell.power_naive, naive.rejection_rate,
                   cell.power_naive < 0.01 ? 0.005 : 0.02);
    }
}

void run_table3(Report& report, bool fast, std::uint64_t seed, int threads) {
    const std::uint32_t mc = fast ? 1200 : 5000;
    const std::uint32_t r = fast ? 600 : 2500;
    struct Cell {
        std::uint32_t n;
        double eps, naive, alpha_c, calibrated;
    };
    const std::vector<Cell> cells = {
        {10, 1.00, 0.392, 0.054, 0.426}, {10, 0.75, 0.085, 0.078, 0.190},
        {10, 0.50, 0.001, 0.154, 0.091}, {10, 0.25, 0.000, 0.310, 0.054},
        {10, 0.10, 0.000, 0.434, 0.050}, {15, 1.00, 0.704, 0.050, 0.704},
        {15, 0.75, 0.040, 0.059, 0.348}, {15, 0.50, 0.008, 0.113, 0.123},
        {15, 0.25, 0.000, 0.271, 0.061}, {15, 0.10, 0.000, 0.417, 0.053},
        {20, 1.00, 0.846, 0.050, 0.846}, {20, 0.75, 0.513, 0.052, 0.527},
        {20, 0.50, 0.032, 0.084, 0.163}, {20, 0.25, 0.000, 0.237, 0.065},
        {20, 0.10, 0.000, 0.402, 0.056}};

    std::uint64_t run = 0;
    for (const Cell& cell : cells) {
        std::cerr << "table3: n = " << cell.n << ", eps = " << fmt(cell.eps) << "...\n";
        std::string tag = "n=" + std::to_string(cell.n) + ", eps=" + fmt(cell.eps);

        CalibrationSpec spec;
        spec.n1 = spec.n2 = cell.n;
        spec.margins = {cell.eps, cell.eps};
        spec.alpha = 0.05;
        spec.sigma = 1.0;
        spec.mc_replicates = mc;
        spec.permutations_per_replicate = r;
        spec.seed = rng::derive(seed, 20, ++run);
        CalibrationResult calibration = calibrate_alpha(spec, threads);
        report.add("alpha_c, " + tag, cell.alpha_c, calibration.alpha_c, 0.015);

        PowerQuery query;
        query.delta = 0.0;
        query.n1 = query.n2 = cell.n;
        query.margins = spec.margins;
        query.alpha = 0.05;
        query.mode = PowerQuery::Mode::calibrated;
        query.alpha_c_fixed = calibration.alpha_c;
        query.sigma = 1.0;
        query.mc_replicates = mc;
        query.permutations_per_replicate = r;
        query.seed = rng::derive(seed, 21, run);
        PowerEstimate calibrated = estimate_power(query, threads);
        report.add("calibrated power, " + tag, cell.calibrated, calibrated.rejection_rate, 0.03);

        query.mode = PowerQuery::Mode::naive;
        PowerEstimate naive = estimate_power(query, threads);
        bool suspect_cell = cell.n == 15 && cell.eps == 0.75;
        report.add("naive power, " + tag, cell.naive, naive.rejection_rate,
                   cell.naive < 0.01 ? 0.005 : 0.03,
                   suspect_cell ? "published cell (.040) breaks monotonicity in n against its "
                                  "neighbors (.085 at n=10, .513 at n=20); likely a typo"
                                : "");
    }
}

void run_designs(Report& report, bool fast, std::uint64_t seed, int threads) {
    const std::uint32_t mc = fast ? 800 : 5000;
    const std::uint32_t r = fast ? 500 : 2500;
    const std::vector<std::pair<double, double>> simulated = {{1.00, 18}, {0.80, 28}, {0.60, 49}};
    for (auto [eps, paper_n] : simulated) {
        std::cerr << "designs: simulation search at eps = " << fmt(eps) << "...\n";
        DesignSearchSpec spec;
        spec.target_power = 0.80;
        spec.margins = {eps, eps};
        spec.alpha = 0.05;
        spec.sigma = 1.0;
        spec.mc_replicates = mc;
        spec.permutations_per_replicate = r;
        spec.seed = rng::derive(seed, 30);
        DesignResult design = find_design(spec, threads);
        double tolerance = paper_n <= 20 ? 2 : (paper_n <= 30 ? 3 : 4);
        report.add_exact("design n, eps=" + fmt(eps), paper_n, design.n_per_group,
                         fast ? tolerance * 3 : tolerance);
    }
    const std::vector<std::pair<double, double>> rule = {{0.40, 109}, {0.20, 435}, {0.10, 1738}};
    for (auto [eps, paper_n] : rule) {
        DesignResult design = inverse_square_design(eps, 17.38);
        report.add_exact("inverse-square n, eps=" + fmt(eps), paper_n, design.n_per_group, 0,
                         "deterministic rule");
    }
}

void run_example2_extras(Report& report, std::uint64_t r_perm, std::uint64_t seed, int threads) {
    const TwoSampleData& data = builtin_dataset("log_cmax").data;
    auto one_sided = sharp_permutation_test(
        data, Sidedness::greater, PermutationPlan::monte_carlo(r_perm, rng::derive(seed, 4)),
        threads);
    report.add("sharp one-sided lambda", 0.0268, one_sided.pvalue, 0.004);

    auto median = median_test_exact(data, Sidedness::greater);
    report.add("Fisher-Mood exact p (greater)", 0.0581, median.pvalue, 0.003,
               "known discrepancy: published value not reproducible from published data; "
               "standard tie convention yields this value (see README)");
}

}  // namespace

int run_reproduce(const ReproduceOptions& options) {
    Report report(options.fast);
    const std::uint64_t r_perm = options.fast ? 20000 : 100000;

    if (options.target == "example1") {
        ExampleTargets targets;
        targets.dataset = "sulfur";
        targets.sharp_two_sided = 0.2221;
        targets.sharp_tolerance = 0.008;
        targets.iu = {{0.005, 0.727}, {0.010, 0.491}, {0.020, 0.103},
                      {0.0232, 0.0494}, {0.0239, 0.0421}, {0.025, 0.031}};
        targets.midrank = {{0.020, 0.113}, {0.0232, 0.055}, {0.0239, 0.050}, {0.025, 0.045}};
        targets.iu_tolerance = 0.01;
        run_example(report, targets, r_perm, options.seed, options.threads);
    } else if (options.target == "example2") {
        ExampleTargets targets;
        targets.dataset = "log_cmax";
        targets.sharp_two_sided = 0.0535;
        targets.sharp_tolerance = 0.005;
        targets.iu = {{0.022, 0.902}, {0.058, 0.545}, {0.071, 0.382},
                      {0.109, 0.071}, {0.120, 0.039}, {0.125, 0.025}};
        targets.midrank = {{0.109, 0.154}, {0.120, 0.063}, {0.125, 0.039}};
        targets.iu_tolerance = 0.012;
        run_example(report, targets, r_perm, options.seed, options.threads);
        run_example2_extras(report, r_perm, options.seed, options.threads);
    } else if (options.target == "example3") {
        ExampleTargets targets;
        targets.dataset = "job_satisfaction";
        targets.sharp_two_sided = 0.00086;
        targets.sharp_tolerance = 0.0006;
        targets.iu = {{22, 0.136}, {24, 0.062}, {25, 0.035}};
        targets.midrank = {{22, 0.164}, {24, 0.054}, {25, 0.026}};
        targets.iu_tolerance = 0.012;
        run_example(report, targets, r_perm, options.seed, options.threads);
    } else if (options.target == "table2") {
        run_table2(report, options.fast, options.seed, options.threads);
    } else if (options.target == "table3") {
        run_table3(report, options.fast, options.seed, options.threads);
    } else if (options.target == "designs") {
        run_designs(report, options.fast, options.seed, options.threads);
    } else {
        std::cerr << "unknown reproduce target: " << options.target
                  << " (expected table2, table3, designs, example1, example2 or example3)\n";
        return 3;
    }

    report.print_markdown(std::cout, options.target);
    if (!options.out_csv.empty()) report.write_csv(options.out_csv);
    return 0;
}

}  // namespace equiperm::cli
