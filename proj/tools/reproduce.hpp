#pragma once

#include <cstdint>
#include <string>

namespace equiperm::cli {

struct ReproduceOptions {
    std::string target;  // table2 | table3 | designs | example1 | example2 | example3
    bool fast = false;   // reduced MC/R, widened tolerances (smoke runs only)
    std::uint64_t seed = 42;
    int threads = 0;
    std::string out_csv;  // optional CSV report path
};

/// Run the side-by-side reproduction report for one target; markdown to
/// stdout, progress to stderr. Returns the process exit code.
int run_reproduce(const ReproduceOptions& options);

}  // namespace equiperm::cli
