#pragma once

#include <iosfwd>
#include <optional>
#include <string>

namespace sscn {

// Exit codes: 0 success, 1 numerical failure / failed property, 2 config error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

std::string version_string();

/// Runs every (algorithm x seed) pair of the config. Writes
/// <output_dir>/<idx>_<name>_seed<seed>.csv per run and metadata.json.
int cmd_run(const std::string& config_path, const std::optional<std::string>& output_dir, std::ostream& out,
            std::ostream& err);

// Prints one line per property; exit 0 iff all pass.
int cmd_verify(const std::string& suite, const std::optional<std::string>& config_path, std::ostream& out,
               std::ostream& err);

// Computes F*, x* and writes <output_dir>/reference.json, which cmd_run reuses.
int cmd_reference(const std::string& config_path, std::ostream& out, std::ostream& err);

}  // namespace sscn
