#ifndef OODKIT_TESTS_CLI_RUNNER_HPP
#define OODKIT_TESTS_CLI_RUNNER_HPP

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

struct CliResult {
    int status = -1;
    std::string output;  // stdout and stderr interleaved
};

/// Runs the oodkit binary with `args` (already shell-quoted where needed).
inline CliResult run_cli(const std::string& args, const std::filesystem::path& scratch) {
    const auto log = scratch / "cli_output.txt";
    const std::string cmd = std::string("'") + OODKIT_CLI_PATH + "' " + args + " > '" + log.string() + "' 2>&1";
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(log);
    r.output.assign(std::istreambuf_iterator<char>(in), {});
    return r;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

inline std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

#endif  // OODKIT_TESTS_CLI_RUNNER_HPP
