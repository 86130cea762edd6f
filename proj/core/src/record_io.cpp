#include "iabplace/record_io.hpp"

#include <charconv>
#include <fstream>

#include <json.hpp>

#include "iabplace/errors.hpp"

namespace iabplace {

namespace {

void append(std::string& out, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

void append(std::string& out, long long v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

nlohmann::json cells_json(std::span<const Cell> cells) {
    auto arr = nlohmann::json::array();
    for (const Cell& c : cells) arr.push_back({c.x, c.y});
    return arr;
}

}  // namespace

std::string artifact_stem(const RunRecord& record) {
    return record.config_hash + "_s" + std::to_string(record.seed);
}

RunFiles run_files(const std::filesystem::path& dir, const RunRecord& record) {
    const std::string stem = artifact_stem(record);
    return {dir / ("run_" + stem + ".csv"), dir / ("traj_" + stem + ".csv"), dir / ("summary_" + stem + ".json")};
}

std::string metrics_csv(const RunRecord& record) {
    std::string out = "episode,reward,mean_rate_bps,p75_rate_bps,coverage\n";
    for (const EpisodeMetrics& m : record.episodes) {
        append(out, static_cast<long long>(m.episode));
        out += ',';
        append(out, m.reward);
        out += ',';
        append(out, m.mean_rate_bps);
        out += ',';
        append(out, m.p75_rate_bps);
        out += ',';
        append(out, m.coverage);
        out += '\n';
    }
    return out;
}

std::string trajectory_csv(const RunRecord& record) {
    std::string out = "step,uav_id,x_cell,y_cell\n";
    std::size_t steps = 0;
    for (const auto& t : record.trajectories) steps = std::max(steps, t.size());
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t u = 0; u < record.trajectories.size(); ++u) {
            if (s >= record.trajectories[u].size()) continue;
            const Cell c = record.trajectories[u][s];
            append(out, static_cast<long long>(s));
            out += ',';
            append(out, static_cast<long long>(u));
            out += ',';
            append(out, static_cast<long long>(c.x));
            out += ',';
            append(out, static_cast<long long>(c.y));
            out += '\n';
        }
    }
    return out;
}

std::string summary_json(const RunRecord& record) {
    nlohmann::json j{{"config_hash", record.config_hash},
                     {"seed", record.seed},
                     {"episodes", record.episodes.size()},
                     {"final_cells", cells_json(record.final_cells)},
                     {"final_reward", record.final_reward},
                     {"coverage", record.coverage},
                     {"wall_seconds", record.wall_seconds},
                     {"interrupted", record.interrupted}};
    if (!record.final_snapshot.user_rates_bps.empty()) {
        j["final_mean_rate_bps"] = mean_of(record.final_snapshot.user_rates_bps);
    }
    if (record.oracle_reward) {
        j["oracle_reward"] = *record.oracle_reward;
        j["oracle_gap"] = *record.oracle_reward != 0.0 ? record.final_reward / *record.oracle_reward : 0.0;
    }
    if (record.failure_step) {
        j["failure_step"] = *record.failure_step;
        if (record.victim) j["victim"] = *record.victim;
        j["step_mean_rate_bps"] = record.step_mean_rate_bps;
    }
    return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << text;
    if (!out) throw FormatError("write failed for " + path.string());
}

RunFiles write_run_artifacts(const std::filesystem::path& dir, const RunRecord& record) {
    std::filesystem::create_directories(dir);
    const RunFiles files = run_files(dir, record);
    write_text(files.metrics, metrics_csv(record));
    write_text(files.trajectory, trajectory_csv(record));
    write_text(files.summary, summary_json(record));
    return files;
}

std::string sweep_csv(std::span<const SweepPoint> points) {
    std::string out = "value,coverage_mean,coverage_std\n";
    for (const SweepPoint& p : points) {
        append(out, p.value);
        out += ',';
        append(out, p.coverage_mean);
        out += ',';
        append(out, p.coverage_std);
        out += '\n';
    }
    return out;
}

}  // namespace iabplace
