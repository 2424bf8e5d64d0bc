#include "csv_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace equiperm::cli {

namespace {

std::string strip(std::string s) {
    auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), issp));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), issp).base(), s.end());
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_double(const std::string& field, const std::string& path, std::size_t line) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw DataError(path + ":" + std::to_string(line) + ": not a number: '" + field + "'");
    return value;
}

}  // namespace

TwoSampleData read_grouped_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file: " + path);

    TwoSampleData data;
    std::string raw;
    std::size_t line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = strip(raw);
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected two comma-separated columns (group,value)");
        std::string group_field = strip(line.substr(0, comma));
        std::string value_field = strip(line.substr(comma + 1));
        if (first_content_line) {
            first_content_line = false;
            if (lower(group_field) == "group" && lower(value_field) == "value") continue;
        }
        if (group_field != "1" && group_field != "2")
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": group must be 1 or 2, got '" + group_field + "'");
        double value = parse_double(value_field, path, line_no);
        (group_field == "1" ? data.sample_a : data.sample_b).push_back(value);
    }
    try {
        data.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(path + ": " + e.what());
    }
    return data;
}

std::vector<double> read_value_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file: " + path);

    std::vector<double> values;
    std::string raw;
    std::size_t line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = strip(raw);
        if (line.empty()) continue;
        if (first_content_line) {
            first_content_line = false;
            if (lower(line) == "value") continue;
        }
        values.push_back(parse_double(line, path, line_no));
    }
    if (values.empty()) throw DataError(path + ": no values found");
    return values;
}

std::string dump_grouped_csv(const TwoSampleData& data) {
    std::ostringstream out;
    out << "group,value\n";
    char buf[40];
    auto emit = [&](int group, double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << group << ',' << buf << '\n';
    };
    for (double v : data.sample_a) emit(1, v);
    for (double v : data.sample_b) emit(2, v);
    return out.str();
}

}  // namespace equiperm::cli
