#pragma once

#include "ratgan/discriminator.hpp"
#include "ratgan/generator.hpp"
#include "ratgan/losses.hpp"

#include <cstdint>
#include <string>

namespace ratgan {

// How the bridge consumes the sentence: static concatenation everywhere,
// recurrent affine conditioning, or recurrent conditioning plus self-attention.
enum class ConditioningMode { cat, rat, rat_sa };

const char* mode_word(ConditioningMode m);
ConditioningMode parse_mode(const std::string& word);  // ConfigError on junk

const char* placement_word(SaPlacement p);

// Everything a run needs; (config, seed) determines every output byte.
struct TrainConfig {
  ConditioningMode mode = ConditioningMode::rat_sa;
  SaPlacement sa_placement = SaPlacement::per_pair;  // used by rat_sa only

  // Generator dimensions.
  int noise_dim = 16;
  int sentence_dim = 32;
  int hidden_dim = 32;
  int num_rat_blocks = 4;
  int base_channels = 64;
  int image_size = 32;
  int sa_groups = 2;

  // Discriminator widths.
  int fe_channels = 32;
  int referee_channels = 32;

  // Loss hyperparameters.
  double penalty_k = 2.0;
  double penalty_p = 6.0;
  double sim_lambda = 4.0;

  // Optimization.
  double lr_g = 1e-4;
  double lr_d = 4e-4;
  double beta1 = 0.0;
  double beta2 = 0.9;
  int batch_size = 16;
  int steps = 2000;
  int d_steps_per_g = 1;

  // Evaluation cadence and artifacts.
  int eval_interval = 50;
  int image_interval = 500;
  int eval_size = 64;

  // Seeds: `seed` drives training streams and weight init; the frozen parts
  // (encoder, text table, similarity projection) have their own seeds so they
  // stay fixed across arms of a comparison.
  uint64_t seed = 1;
  uint64_t encoder_seed = 101;
  uint64_t text_seed = 202;
  uint64_t proj_seed = 303;

  std::string run_dir = "runs/out";

  GeneratorConfig generator_config() const;
  DiscriminatorConfig discriminator_config() const;
  LossHyperparams loss_hp() const;

  // Throws ConfigError when any invariant fails.
  void validate() const;
};

// Canonical key=value text, one pair per line, fixed key order, shortest
// round-trip float formatting. parse(format(c)) == c, bit-exactly.
std::string format_config(const TrainConfig& cfg);

// Same, minus bookkeeping keys (run_dir) that do not define the run's
// identity; this is what checkpoints embed and compare.
std::string format_config_identity(const TrainConfig& cfg);

// Flat key=value lines; '#' starts a comment; unknown or duplicate keys are
// errors. Unset keys keep their defaults.
TrainConfig parse_config_text(const std::string& text);
TrainConfig parse_config_file(const std::string& path);

// Name of the first identity key whose value differs, empty when the configs
// describe the same run (run_dir may differ).
std::string first_config_mismatch(const TrainConfig& a, const TrainConfig& b);

}  // namespace ratgan
