#pragma once

// Binary checkpoint, all integers little-endian:
//   "SGANCKPT" | u32 version | u64 config hash | u32 entry count
//   per entry: u32 name length | name | u32 rank | u32 dims[rank] | f64 values (row-major)
// Entry names are "<network>/<tensor>", e.g. "G/W0". No timestamps are stored.

#include "sgan/eval.hpp"
#include "sgan/games.hpp"
#include "sgan/networks.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgan {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointEntry {
  std::string name;
  std::vector<std::uint32_t> dims;
  Matrix value;  // stored (rows x cols); rank-1 entries are (1 x n)
};

struct Checkpoint {
  std::uint64_t config_hash = 0;
  std::vector<CheckpointEntry> entries;

  const CheckpointEntry* find(const std::string& name) const;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Everything a run persists: the five networks, the golden classifier and the
/// last epoch's bookkeeping.
struct RunState {
  SganNetworks nets;
  GoldenClassifier golden;
  MetricsRecord last;
};

Checkpoint make_checkpoint(const RunState& state, std::uint64_t config_hash);
/// Copies parameters into `state`, whose networks must already have matching shapes.
void restore_checkpoint(const Checkpoint& ckpt, RunState& state);

}  // namespace sgan
