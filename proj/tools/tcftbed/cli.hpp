#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace tcft::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kDataError = 3;
inline constexpr int kNumericError = 4;

int cmd_prepare(const RunConfig& config, std::ostream& out);
int cmd_train(const RunConfig& config, std::size_t jobs, std::ostream& out);
int cmd_evaluate(const RunConfig& config, std::ostream& out);
int cmd_ablate(const RunConfig& config, std::size_t jobs, std::ostream& out);

// Full command line, including argv[0]. Errors are reported on `err` and
// mapped to the exit codes above.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Output layout under the run directory.
std::filesystem::path archive_dir(const RunConfig& c);
std::filesystem::path checkpoint_path(const RunConfig& c, std::size_t window);
std::filesystem::path manifest_path(const RunConfig& c, const std::string& command);

}  // namespace tcft::cli
