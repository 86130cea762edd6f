#pragma once

// Model checkpoints. A checkpoint is a JSON document holding the config
// hash, the exploration schedule and, per UAV, either the Q-table or the
// layer shapes plus online/target parameters. Doubles are written with
// round-trip precision, so a save/load cycle is exact.

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "iabplace/agent/epsilon.hpp"
#include "iabplace/agent/learner.hpp"

namespace iabplace {

struct CheckpointHeader {
    std::string config_hash;
    EpsilonSchedule schedule;
};

void save_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                     std::span<const std::unique_ptr<Learner>> learners);

/// Restores parameters into `learners`, which must already be constructed
/// for the expected configuration. Throws FormatError on any mismatch in
/// learner kind, count, table size or layer shape.
CheckpointHeader load_checkpoint(const std::filesystem::path& path,
                                 std::span<const std::unique_ptr<Learner>> learners);

}  // namespace iabplace
