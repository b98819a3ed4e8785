#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "projseg/config.hpp"

namespace projseg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitVerify = 3;

struct Options {
    std::filesystem::path out_dir = "run";
    bool force = false;
    std::vector<std::string> ids;   // infer/eval subset; empty = test split
    std::string sample_id;          // project target; empty = first manifest id
    std::string corrupt_op;         // verify test hook: breaks one backward pass
};

// subcommand bodies; data problems throw projseg::Error
void cmd_gen(const RunConfig& cfg, const Options& opt);
void cmd_train(const RunConfig& cfg, const Options& opt);
void cmd_infer(const RunConfig& cfg, const Options& opt);
void cmd_eval(const RunConfig& cfg, const Options& opt);
void cmd_project(const RunConfig& cfg, const Options& opt);
int cmd_verify(const Options& opt);  // returns the number of failed checks

// class index -> report name for the active task
std::vector<std::pair<int, std::string>> foreground_classes(Task task);

// full argv dispatch (excluding argv[0]); returns a process exit code
int run_cli(const std::vector<std::string>& args);

}  // namespace projseg::cli
