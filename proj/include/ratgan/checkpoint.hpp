#pragma once

#include "ratgan/config.hpp"
#include "ratgan/rng.hpp"
#include "ratgan/tensor.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ratgan {

constexpr uint32_t kCheckpointVersion = 1;

// A full training snapshot: run identity (config minus bookkeeping), progress,
// both random streams, optimizer step counters, and every tensor the run owns
// (weights and Adam moments) as an ordered name -> shape -> float64 table.
// save -> load -> save is byte-identical.
struct Checkpoint {
  uint32_t version = kCheckpointVersion;
  TrainConfig config;
  int64_t step = 0;
  RngState data_rng;
  RngState noise_rng;
  int64_t opt_g_t = 0;
  int64_t opt_d_t = 0;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

// FormatError on bad magic, unsupported version, or truncation; the embedded
// config is parsed back into TrainConfig (run_dir keeps its default).
Checkpoint load_checkpoint(const std::string& path);

// Tensor lookup by name; FormatError when absent.
const Tensor& checkpoint_tensor(const Checkpoint& ckpt, const std::string& name);

}  // namespace ratgan
