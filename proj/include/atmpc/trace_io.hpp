#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "atmpc/sim.hpp"

namespace atmpc {

/// One line of trace.jsonl.  Non-finite numbers are written as null.
std::string step_record_json(const StepRecord& rec);

/// Contents of sets/<t>.json: Psi_t vertices, S_t, X_TS_t, the disturbance
/// sets and the optimal tube sections.
std::string step_sets_json(const StepRecord& rec);

/// Run status, constraint violations and totals.
std::string run_summary_json(const RunTrace& tr);

/// Writes trace.jsonl, metrics.csv, summary.json and sets/<t>.json into dir.
void write_run(const std::filesystem::path& dir, const RunTrace& tr);

/// One row per (pair, t); seed is written as the first column.
void write_comparison_csv(const std::filesystem::path& file, const ComparisonReport& rep, std::uint64_t seed,
                          bool append = false);

/// Header line of metrics.csv, without the newline.
std::string metrics_header(int m);

}  // namespace atmpc
