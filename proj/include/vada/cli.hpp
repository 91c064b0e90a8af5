#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vada::cli {

/// 0 success, 1 program rejected (parse/lint/wardedness/stratification) or
/// fact not derived, 2 runtime or I/O failure and bad usage.
enum ExitCode : int { Ok = 0, Rejected = 1, Failure = 2 };

struct RunConfig {
    std::filesystem::path program;
    std::map<std::string, std::filesystem::path> facts;
    std::optional<std::filesystem::path> out_dir;
    uint32_t null_depth = 32;
    size_t cache_limit = 0;
    bool provenance = false;
    bool json = false;
    uint64_t seed = 0;
};

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_lint(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_explain(const RunConfig& config, const std::string& fact, std::ostream& out, std::ostream& err);

struct ProbConfig {
    std::string query;
    std::string method = "exact";  // exact | mc
    size_t samples = 10000;
    size_t cap = 20;
};
int cmd_prob(const RunConfig& config, const ProbConfig& prob, std::ostream& out, std::ostream& err);

/// Full command line without the program name, e.g. {"run", "x.vada", "--json"}.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vada::cli
