#pragma once

#include <stdexcept>
#include <string>

#include "equiperm/types.hpp"

namespace equiperm::cli {

/// Thrown for unreadable or malformed data files (CLI exit code 2).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two-column CSV "group,value" with groups coded 1/2; the header line is
/// optional. Comma separator, '.' decimal point.
TwoSampleData read_grouped_csv(const std::string& path);

/// One-column file of values (one per line, optional "value" header).
std::vector<double> read_value_column(const std::string& path);

/// Dump in the grouped format with round-trip-exact doubles.
std::string dump_grouped_csv(const TwoSampleData& data);

}  // namespace equiperm::cli
