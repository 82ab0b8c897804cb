// Command-line front end: train/resume runs, sample images from checkpoints,
// score checkpoints against datasets, and drive the ablation and hidden-size
// sweep harnesses. Exit codes: 0 success, 1 usage, 2 data/format error,
// 3 numerical abort.
#include <CLI11.hpp>

#include "ratgan/train.hpp"

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

namespace {

void print_train_result(const ratgan::TrainResult& r) {
  std::printf("run_id: %s\n", r.run_id.c_str());
  std::printf("run_dir: %s\n", r.run_dir.c_str());
  std::printf("steps: %lld\n", static_cast<long long>(r.steps_done));
  std::printf("generator parameters: %lld\n", static_cast<long long>(r.gen_param_count));
  std::printf("metrics csv: %s\n", r.csv_path.c_str());
  std::printf("final checkpoint: %s\n", r.final_checkpoint.c_str());
  std::printf("final toy_fid: %.10g\n", r.final_toy_fid);
  std::printf("final toy_cs: %.10g\n", r.final_toy_cs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text-to-image GAN with recurrent affine conditioning"};
  app.require_subcommand(1);

  std::string config_path, resume_path, ckpt_path, dataset_path, caption, out_dir;
  int n = 1;
  int num_seeds = 3;
  uint64_t seed = 1;
  std::vector<int> dims = {0, 4, 8, 16, 32, 64};

  CLI::App* tr = app.add_subcommand("train", "Train a model from a config file");
  tr->add_option("--config", config_path, "key=value config file")->required();
  tr->add_option("--resume", resume_path, "checkpoint to continue from");

  CLI::App* sa = app.add_subcommand("sample", "Generate images from a checkpoint");
  sa->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  sa->add_option("--caption", caption, "caption to condition on")->required();
  sa->add_option("--n", n, "number of images")->default_val(1);
  sa->add_option("--seed", seed, "noise seed")->default_val(1);
  sa->add_option("--out", out_dir, "output directory")->required();

  CLI::App* ev = app.add_subcommand("eval", "Score a checkpoint against a dataset");
  ev->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  ev->add_option("--dataset", dataset_path, "dataset file")->required();

  CLI::App* ab = app.add_subcommand("ablate", "Train cat/rat/rat_sa arms across seeds");
  ab->add_option("--config", config_path, "base config file")->required();
  ab->add_option("--seeds", num_seeds, "seeds per arm")->default_val(3);

  CLI::App* sw = app.add_subcommand("sweep", "Train one recurrent arm per hidden size");
  sw->add_option("--config", config_path, "base config file")->required();
  sw->add_option("--dims", dims, "comma-separated hidden sizes (0 = static fallback)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int r = app.exit(e);
    return r == 0 ? 0 : 1;  // bad flags are usage errors; --help is success
  }

  try {
    if (tr->parsed()) {
      const ratgan::TrainConfig cfg = ratgan::parse_config_file(config_path);
      const ratgan::TrainResult r = resume_path.empty()
                                        ? ratgan::train(cfg)
                                        : ratgan::train_resume(cfg, resume_path);
      print_train_result(r);
    } else if (sa->parsed()) {
      const std::vector<std::string> paths =
          ratgan::sample_images(ckpt_path, caption, n, seed, out_dir);
      for (const std::string& p : paths) std::printf("%s\n", p.c_str());
    } else if (ev->parsed()) {
      const ratgan::EvalResult r = ratgan::eval_checkpoint(ckpt_path, dataset_path);
      std::printf("samples: %d\n", r.n);
      std::printf("toy_fid: %.10g\n", r.toy_fid);
      std::printf("toy_cs: %.10g\n", r.toy_cs);
    } else if (ab->parsed()) {
      const ratgan::TrainConfig base = ratgan::parse_config_file(config_path);
      const ratgan::AblateReport rep = ratgan::ablate(base, num_seeds);
      std::fputs(rep.text.c_str(), stdout);
    } else if (sw->parsed()) {
      const ratgan::TrainConfig base = ratgan::parse_config_file(config_path);
      const ratgan::SweepReport rep = ratgan::sweep_hidden(base, dims);
      std::fputs(rep.text.c_str(), stdout);
    }
  } catch (const ratgan::UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const ratgan::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ratgan::FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ratgan::VocabError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ratgan::ShapeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ratgan::NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
