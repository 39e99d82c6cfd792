#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "tripod/io.hpp"

namespace tripod {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Writes the full-cycle kernel (kernel.csv) and its metadata
/// (kernel_meta.json) into config.output_dir.
int cmd_kernel(const RunConfig& config, std::ostream& log);

/// Writes eigenvalues.csv, modes.csv and modes_summary.json.
int cmd_modes(const RunConfig& config, std::ostream& log);

/// Writes sweep.csv and sweep_summary.json for the configured (T, L) box.
int cmd_sweep(const RunConfig& config, std::ostream& log);

struct SplitInputs {
  std::optional<std::string> a1_path;
  std::optional<std::string> a2_path;
  std::optional<std::size_t> mode_index;  ///< overrides config.mode_index
};

/// Either runs the protocol on two envelope files (writes a_plus.csv,
/// a_minus.csv and split_report.json) or, in mode form, measures the
/// mode-wise matrix against the ideal one (split_report.json plus a
/// human-readable table on `log`).
int cmd_split(const RunConfig& config, const SplitInputs& inputs,
              std::ostream& log);

/// Runs the invariant suite and prints one pass/fail line per check.
/// Exit 0 iff every check passes.
int cmd_validate(const RunConfig& config, std::ostream& log);

}  // namespace tripod
