#pragma once

// Run the CLI binary and capture exit code, stdout and stderr via temp files.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace process {

struct Result {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline Result run(const std::string& command) {
    static int counter = 0;
    std::string out_path = "cli_out_" + std::to_string(counter) + ".txt";
    std::string err_path = "cli_err_" + std::to_string(counter) + ".txt";
    ++counter;

    std::string full = command + " > " + out_path + " 2> " + err_path;
    int status = std::system(full.c_str());

    Result result;
    if (status == -1) {
        result.exit_code = -1;
    } else if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else {
        result.exit_code = 128;
    }
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return result;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace process
