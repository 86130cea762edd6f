#pragma once

// Run artifacts on disk: per-episode metrics CSV, greedy trajectory CSV and
// a JSON summary. File names embed the config hash and seed.

#include <filesystem>
#include <span>
#include <string>

#include "iabplace/scenarios.hpp"

namespace iabplace {

/// "<config hash>_s<seed>".
std::string artifact_stem(const RunRecord& record);

struct RunFiles {
    std::filesystem::path metrics;     // run_<stem>.csv
    std::filesystem::path trajectory;  // traj_<stem>.csv
    std::filesystem::path summary;     // summary_<stem>.json
};

RunFiles run_files(const std::filesystem::path& dir, const RunRecord& record);

/// Columns: episode,reward,mean_rate_bps,p75_rate_bps,coverage
std::string metrics_csv(const RunRecord& record);

/// Columns: step,uav_id,x_cell,y_cell
std::string trajectory_csv(const RunRecord& record);

std::string summary_json(const RunRecord& record);

/// Writes all three files into `dir` (created if missing).
RunFiles write_run_artifacts(const std::filesystem::path& dir, const RunRecord& record);

/// Columns: value,coverage_mean,coverage_std
std::string sweep_csv(std::span<const SweepPoint> points);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace iabplace
