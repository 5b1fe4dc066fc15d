#pragma once

#include "plume/rl/policy.hpp"
#include "plume/rl/ppo.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

// Binary policy snapshots ("PLMP"): little-endian, float32 parameters in
// declaration order, trailing SHA-256 over everything before it. Training
// checkpoints are the same format with optimiser state and progress appended
// before the digest, so a checkpoint also loads as a policy.
namespace plume::io {

inline constexpr std::uint32_t kSnapshotVersion = 1;

struct Checkpoint {
  rl::PolicySnapshot policy;
  nn::AdamState<float> opt;
  int update = 0;
  long steps_done = 0;
  std::vector<rl::CurveRecord> curve;

  rl::TrainState train_state() const;
  static Checkpoint from(const rl::TrainState& s, const nn::NetworkSpec& spec, const rl::ActionTable& actions,
                         const rl::RegionPartition& partition);
};

std::vector<std::uint8_t> encode_snapshot(const rl::PolicySnapshot& snap, const std::string& config_hash);
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt, const std::string& config_hash);

/// Throws ArtifactError on a bad magic/version, digest mismatch, truncation or
/// an unsupported network layout. Accepts checkpoints too.
rl::PolicySnapshot decode_snapshot(std::span<const std::uint8_t> bytes, std::string* config_hash = nullptr);
/// Throws ArtifactError when the bytes hold a plain policy without training state.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, std::string* config_hash = nullptr);

void save_snapshot(const std::filesystem::path& path, const rl::PolicySnapshot& snap, const std::string& config_hash);
rl::PolicySnapshot load_snapshot(const std::filesystem::path& path, std::string* config_hash = nullptr);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt, const std::string& config_hash);
Checkpoint load_checkpoint(const std::filesystem::path& path, std::string* config_hash = nullptr);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace plume::io
