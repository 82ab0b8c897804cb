#pragma once

#include "ratgan/checkpoint.hpp"
#include "ratgan/config.hpp"
#include "ratgan/data.hpp"
#include "ratgan/metrics.hpp"
#include "ratgan/optim.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ratgan {

// FNV-1a over raw bytes; the workhorse behind batch/frozen-weight hashing.
uint64_t fnv1a64(const void* data, size_t n);
uint64_t fnv1a64_extend(uint64_t h, const void* data, size_t n);

// Order-sensitive hash of everything a batch feeds the networks.
uint64_t batch_hash(const Batch& b);

// All mutable and frozen pieces of one run. The parameter lists share nodes
// with the weight structs, so optimizer writes are visible to the forward
// passes.
struct TrainState {
  TrainConfig cfg;
  GeneratorWeights gen;
  DiscriminatorWeights disc;
  ParamList gen_params;
  ParamList disc_params;
  AdamState opt_g;
  AdamState opt_d;
  FrozenEncoder enc;
  TextEncoder text;
  Linear proj;
  Rng data_rng{0};   // batches
  Rng noise_rng{0};  // z draws inside updates
  int64_t step = 0;
};

// Builds weights, frozen parts, optimizer state, and the two seeded streams.
// Validates structure (generator/discriminator/loss shapes) but not training
// hyperparameters, so zero learning rates can be exercised directly.
TrainState init_train_state(const TrainConfig& cfg);

// Hash over every weight that must never train: frozen encoder, text table,
// similarity projection.
uint64_t frozen_weights_hash(const TrainState& st);

Checkpoint make_checkpoint(const TrainState& st);
TrainState state_from_checkpoint(const Checkpoint& ckpt);

// ConfigError naming the first differing key when cfg does not describe the
// checkpoint's run.
void require_same_run(const TrainConfig& cfg, const Checkpoint& ckpt);

struct StepLosses {
  double l_d = 0.0;
  double l_g = 0.0;
  double penalty = 0.0;
  double sim = 0.0;
};

// One discriminator update on the batch: batch-mean hinge terms plus the
// gradient penalty on real pairs, then Adam. Returns (l_d, penalty) means.
std::pair<double, double> d_update(TrainState& st, const Batch& batch);

// One generator update: batch-mean of -score(G(z,T),T) - lambda*sim, then
// Adam. Returns (l_g, sim) means.
std::pair<double, double> g_update(TrainState& st, const Batch& batch);

// One discriminator update followed by one generator update.
StepLosses train_step(TrainState& st, const Batch& batch);

struct TrainResult {
  std::string run_dir;
  std::string run_id;
  std::string csv_path;
  std::string final_checkpoint;
  int64_t steps_done = 0;
  int64_t gen_param_count = 0;
  uint64_t first_batch_hash = 0;  // hash of the step-1 batch (fresh runs)
  double final_toy_fid = 0.0;     // from the last eval interval
  double final_toy_cs = 0.0;
};

// Full run: metrics CSV every eval_interval (header
// run_id,step,toy_fid,toy_cs,l_d,l_g,penalty,sim), sample images every
// image_interval, checkpoints at every eval plus a final one. (config, seed)
// determines every output byte. A NumericError mid-run is rethrown with the
// last good checkpoint path appended.
TrainResult train(const TrainConfig& cfg);

// Continues a checkpointed run to cfg.steps; the loss trace matches the
// uninterrupted run bit-exactly. cfg must describe the same run (run_dir is
// free, so the continuation can live in a fresh directory).
TrainResult train_resume(const TrainConfig& cfg, const std::string& ckpt_path);

struct AblateRun {
  std::string arm;
  uint64_t seed = 0;
  double toy_cs = 0.0;
  double toy_fid = 0.0;
  int64_t gen_params = 0;
  uint64_t first_batch_hash = 0;
};

struct AblateReport {
  std::vector<std::string> arms;  // {"cat","rat","rat_sa"}
  std::vector<AblateRun> runs;    // arm-major, num_seeds runs per arm
  std::vector<double> mean_cs, sd_cs, mean_fid, sd_fid;  // per arm
  std::string verdict;
  std::string text;  // rendered table, also written to <run_dir>/ablate_report.txt
};

// Trains cat / rat / rat_sa under seeds base.seed .. base.seed+num_seeds-1
// with identical step counts and identical data streams per seed.
AblateReport ablate(const TrainConfig& base, int num_seeds);

struct SweepRow {
  int hidden = 0;
  int64_t gen_params = 0;
  double toy_cs = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::string text;  // also written to <run_dir>/sweep_report.txt
};

// Trains one recurrent-conditioning arm per hidden size (0 drops the
// recurrent machinery: unconditioned bridge blocks, sentence enters only
// through the decoder). Self-attention is off so rows differ in hidden size
// alone.
SweepReport sweep_hidden(const TrainConfig& base, const std::vector<int>& dims);

// n images from n fresh z draws under the given seed; returns the file paths.
std::vector<std::string> sample_images(const std::string& ckpt_path,
                                       const std::string& caption, int n,
                                       uint64_t seed, const std::string& out_dir);

struct EvalResult {
  double toy_fid = 0.0;
  double toy_cs = 0.0;
  int n = 0;
};

// Generates one image per dataset scene (captions re-derived from the scene,
// z seeded from the run seed) and scores them against the dataset.
EvalResult eval_checkpoint(const std::string& ckpt_path,
                           const std::string& dataset_path);

}  // namespace ratgan
