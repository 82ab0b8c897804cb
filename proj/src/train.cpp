#include "ratgan/train.hpp"

#include "ratgan/errors.hpp"
#include "ratgan/image_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace ratgan {

namespace fs = std::filesystem;

uint64_t fnv1a64_extend(uint64_t h, const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t fnv1a64(const void* data, size_t n) {
  return fnv1a64_extend(0xcbf29ce484222325ULL, data, n);
}

namespace {

uint64_t hash_doubles(uint64_t h, const std::vector<double>& v) {
  return fnv1a64_extend(h, v.data(), v.size() * sizeof(double));
}

Tensor draw_noise(Rng& rng, int dim) {
  std::vector<double> v(static_cast<size_t>(dim));
  for (double& x : v) x = rng.normal();
  return Tensor::from_data({dim}, std::move(v));
}

std::string zero_pad(int64_t v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*lld", width, static_cast<long long>(v));
  return buf;
}

}  // namespace

uint64_t batch_hash(const Batch& b) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const Tensor& img : b.images) h = hash_doubles(h, img.data());
  for (const Tensor& t : b.t_matched) h = hash_doubles(h, t.data());
  for (const Tensor& t : b.t_mismatched) h = hash_doubles(h, t.data());
  for (int m : b.mis_index) h = fnv1a64_extend(h, &m, sizeof(m));
  for (const Caption& c : b.captions) {
    for (const std::string& w : c.tokens) {
      h = fnv1a64_extend(h, w.data(), w.size());
      h = fnv1a64_extend(h, "|", 1);
    }
    h = fnv1a64_extend(h, ";", 1);
  }
  return h;
}

TrainState init_train_state(const TrainConfig& cfg) {
  const GeneratorConfig gcfg = cfg.generator_config();
  gcfg.validate();
  const DiscriminatorConfig dcfg = cfg.discriminator_config();
  dcfg.validate();
  cfg.loss_hp().validate();

  TrainState st;
  st.cfg = cfg;
  Rng grng(Rng::derive(cfg.seed, "gen-init"));
  st.gen = make_generator_weights(gcfg, grng);
  Rng drng(Rng::derive(cfg.seed, "disc-init"));
  st.disc = make_discriminator_weights(dcfg, drng);
  st.gen_params = generator_params(st.gen);
  st.disc_params = discriminator_params(st.disc);
  st.opt_g = make_adam_state(st.gen_params);
  st.opt_d = make_adam_state(st.disc_params);
  st.enc = make_frozen_encoder(cfg.encoder_seed);
  st.text = make_text_encoder(cfg.text_seed, cfg.sentence_dim);
  st.proj = make_similarity_projection(cfg.sentence_dim, st.enc.out_channels(),
                                       cfg.proj_seed);
  st.data_rng = Rng(Rng::derive(cfg.seed, "data"));
  st.noise_rng = Rng(Rng::derive(cfg.seed, "noise"));
  return st;
}

uint64_t frozen_weights_hash(const TrainState& st) {
  uint64_t h = 0xcbf29ce484222325ULL;
  h = hash_doubles(h, st.enc.w1.data());
  h = hash_doubles(h, st.enc.w2.data());
  h = hash_doubles(h, st.enc.w3.data());
  h = hash_doubles(h, st.text.table.data());
  h = hash_doubles(h, st.proj.w.data());
  h = hash_doubles(h, st.proj.b.data());
  return h;
}

Checkpoint make_checkpoint(const TrainState& st) {
  Checkpoint c;
  c.config = st.cfg;
  c.step = st.step;
  c.data_rng = st.data_rng.state();
  c.noise_rng = st.noise_rng.state();
  c.opt_g_t = st.opt_g.t;
  c.opt_d_t = st.opt_d.t;
  for (const NamedParam& p : st.gen_params) c.tensors.emplace_back(p.name, p.tensor);
  for (const NamedParam& p : st.disc_params) c.tensors.emplace_back(p.name, p.tensor);
  const auto put_moments = [&c](const char* prefix, const ParamList& params,
                                const AdamState& opt) {
    for (size_t i = 0; i < params.size(); ++i) {
      const int n = static_cast<int>(opt.m[i].size());
      c.tensors.emplace_back(std::string(prefix) + ".m." + params[i].name,
                             Tensor::from_data({n}, opt.m[i]));
      c.tensors.emplace_back(std::string(prefix) + ".v." + params[i].name,
                             Tensor::from_data({n}, opt.v[i]));
    }
  };
  put_moments("opt.g", st.gen_params, st.opt_g);
  put_moments("opt.d", st.disc_params, st.opt_d);
  return c;
}

TrainState state_from_checkpoint(const Checkpoint& ckpt) {
  TrainState st = init_train_state(ckpt.config);
  const auto restore_params = [&ckpt](ParamList& params) {
    for (NamedParam& p : params) {
      const Tensor& src = checkpoint_tensor(ckpt, p.name);
      if (src.shape() != p.tensor.shape()) {
        throw FormatError("checkpoint tensor '" + p.name + "' has shape " +
                          src.shape_str() + " but the config implies " +
                          p.tensor.shape_str());
      }
      p.tensor.mutable_data() = src.data();
    }
  };
  restore_params(st.gen_params);
  restore_params(st.disc_params);
  const auto restore_moments = [&ckpt](const char* prefix, const ParamList& params,
                                       AdamState& opt) {
    for (size_t i = 0; i < params.size(); ++i) {
      const Tensor& m = checkpoint_tensor(ckpt, std::string(prefix) + ".m." + params[i].name);
      const Tensor& v = checkpoint_tensor(ckpt, std::string(prefix) + ".v." + params[i].name);
      if (m.data().size() != opt.m[i].size() || v.data().size() != opt.v[i].size()) {
        throw FormatError("checkpoint moment size mismatch for '" + params[i].name + "'");
      }
      opt.m[i] = m.data();
      opt.v[i] = v.data();
    }
  };
  restore_moments("opt.g", st.gen_params, st.opt_g);
  restore_moments("opt.d", st.disc_params, st.opt_d);
  st.opt_g.t = ckpt.opt_g_t;
  st.opt_d.t = ckpt.opt_d_t;
  st.data_rng.set_state(ckpt.data_rng);
  st.noise_rng.set_state(ckpt.noise_rng);
  st.step = ckpt.step;
  return st;
}

namespace {

std::string config_value_line(const TrainConfig& cfg, const std::string& key) {
  std::istringstream in(format_config_identity(cfg));
  std::string line;
  const std::string prefix = key + " = ";
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
  }
  return "?";
}

}  // namespace

void require_same_run(const TrainConfig& cfg, const Checkpoint& ckpt) {
  const std::string key = first_config_mismatch(cfg, ckpt.config);
  if (!key.empty()) {
    throw ConfigError("config mismatch with checkpoint at key '" + key +
                      "': config has '" + config_value_line(cfg, key) +
                      "', checkpoint has '" + config_value_line(ckpt.config, key) +
                      "'");
  }
}

std::pair<double, double> d_update(TrainState& st, const Batch& batch) {
  const TrainConfig& cfg = st.cfg;
  const GeneratorConfig gcfg = cfg.generator_config();
  const LossHyperparams hp = cfg.loss_hp();
  const int n = static_cast<int>(batch.images.size());
  zero_all_grads(st.gen_params);
  zero_all_grads(st.disc_params);

  // Fakes are constants for the discriminator phase: no recording, so no
  // generator gradients are built or spilled.
  std::vector<Tensor> fakes;
  fakes.reserve(static_cast<size_t>(n));
  {
    NoGradGuard ng;
    for (int i = 0; i < n; ++i) {
      fakes.push_back(
          generate(draw_noise(st.noise_rng, cfg.noise_dim), batch.t_matched[i],
                   st.gen, gcfg));
    }
  }

  Tape tape;
  const auto score_fn = [&st](const Tensor& f, const Tensor& tt) {
    return referee_score(fe_extract(f, st.disc.fe), tt, st.disc.referee);
  };
  Tensor total = Tensor::scalar(0.0);
  Tensor pen_total = Tensor::scalar(0.0);
  for (int i = 0; i < n; ++i) {
    const Tensor s_real = discriminate(batch.images[i], batch.t_matched[i], st.enc, st.disc);
    const Tensor s_fake = discriminate(fakes[i], batch.t_matched[i], st.enc, st.disc);
    const Tensor s_mis = discriminate(batch.images[i], batch.t_mismatched[i], st.enc, st.disc);
    const Tensor hinge = hinge_d_terms(s_real, s_fake, s_mis);
    const Tensor feats = frozen_encode(batch.images[i], st.enc);
    const Tensor pen = gradient_penalty_term(score_fn, feats, batch.t_matched[i], hp);
    total = add(total, add(hinge, pen));
    pen_total = add(pen_total, pen);
  }
  const Tensor l_d = scale(total, 1.0 / n);
  backward(l_d);
  const auto grads = collect_grads(st.disc_params);
  adam_step(st.disc_params, grads, st.opt_d, {cfg.lr_d, cfg.beta1, cfg.beta2, 1e-8});
  return {l_d.value(), pen_total.value() / n};
}

std::pair<double, double> g_update(TrainState& st, const Batch& batch) {
  const TrainConfig& cfg = st.cfg;
  const GeneratorConfig gcfg = cfg.generator_config();
  const LossHyperparams hp = cfg.loss_hp();
  const int n = static_cast<int>(batch.images.size());
  zero_all_grads(st.gen_params);
  zero_all_grads(st.disc_params);

  Tape tape;
  Tensor total = Tensor::scalar(0.0);
  Tensor sim_total = Tensor::scalar(0.0);
  for (int i = 0; i < n; ++i) {
    const Tensor fake = generate(draw_noise(st.noise_rng, cfg.noise_dim),
                                 batch.t_matched[i], st.gen, gcfg);
    const Tensor s_fake = discriminate(fake, batch.t_matched[i], st.enc, st.disc);
    const Tensor emb = embed_image(fake, st.enc, st.proj);
    const Tensor sim = cosine_similarity_graph(emb, batch.t_matched[i]);
    total = add(total, generator_loss(s_fake, sim, hp));
    sim_total = add(sim_total, sim);
  }
  const Tensor l_g = scale(total, 1.0 / n);
  backward(l_g);
  const auto grads = collect_grads(st.gen_params);
  adam_step(st.gen_params, grads, st.opt_g, {cfg.lr_g, cfg.beta1, cfg.beta2, 1e-8});
  return {l_g.value(), sim_total.value() / n};
}

StepLosses train_step(TrainState& st, const Batch& batch) {
  StepLosses out;
  const auto [l_d, pen] = d_update(st, batch);
  const auto [l_g, sim] = g_update(st, batch);
  out.l_d = l_d;
  out.penalty = pen;
  out.l_g = l_g;
  out.sim = sim;
  return out;
}

namespace {

struct EvalSet {
  std::vector<Tensor> ts;
  std::vector<Tensor> zs;
  FeatureStats real_stats;
};

EvalSet make_eval_set(const TrainConfig& cfg, const TextEncoder& text,
                      const FrozenEncoder& enc) {
  Rng erng(Rng::derive(cfg.seed, "eval"));
  EvalSet es;
  std::vector<Tensor> real_feats;
  NoGradGuard ng;
  for (int i = 0; i < cfg.eval_size; ++i) {
    const Scene sc = sample_scene(erng);
    const Caption cap = caption_of(sc, erng.uniform_int(kNumTemplates));
    es.ts.push_back(encode_text(cap, text));
    real_feats.push_back(
        global_avg_pool(frozen_encode(render_scene(sc, cfg.image_size), enc)));
  }
  for (int i = 0; i < cfg.eval_size; ++i) es.zs.push_back(draw_noise(erng, cfg.noise_dim));
  es.real_stats = feature_stats(real_feats);
  return es;
}

struct EvalOut {
  double fid = 0.0;
  double cs = 0.0;
};

EvalOut run_eval(const TrainState& st, const GeneratorConfig& gcfg, const EvalSet& es) {
  NoGradGuard ng;
  std::vector<Tensor> gen_imgs, gen_feats;
  gen_imgs.reserve(es.ts.size());
  for (size_t i = 0; i < es.ts.size(); ++i) {
    Tensor img = generate(es.zs[i], es.ts[i], st.gen, gcfg);
    gen_feats.push_back(global_avg_pool(frozen_encode(img, st.enc)));
    gen_imgs.push_back(std::move(img));
  }
  EvalOut out;
  out.fid = frechet_distance(es.real_stats, feature_stats(gen_feats));
  out.cs = toy_clip_score(gen_imgs, es.ts, st.enc, st.proj);
  return out;
}

std::string make_run_id(const TrainConfig& cfg) {
  return std::string(mode_word(cfg.mode)) + "-h" + std::to_string(cfg.hidden_dim) +
         "-s" + std::to_string(cfg.seed);
}

std::string ckpt_path_for(const std::string& run_dir, int64_t step) {
  return run_dir + "/ckpt_step" + zero_pad(step, 6) + ".rgc";
}

TrainResult run_training(TrainState& st, bool fresh) {
  const TrainConfig& cfg = st.cfg;
  cfg.validate();
  fs::create_directories(cfg.run_dir + "/images");
  {
    std::ofstream snap(cfg.run_dir + "/config.cfg", std::ios::trunc);
    snap << format_config(cfg);
  }
  const GeneratorConfig gcfg = cfg.generator_config();
  const EvalSet es = make_eval_set(cfg, st.text, st.enc);

  TrainResult res;
  res.run_dir = cfg.run_dir;
  res.run_id = make_run_id(cfg);
  res.csv_path = cfg.run_dir + "/metrics.csv";
  res.gen_param_count = count_parameters(st.gen);
  res.final_toy_fid = std::numeric_limits<double>::quiet_NaN();
  res.final_toy_cs = std::numeric_limits<double>::quiet_NaN();

  const bool need_header =
      fresh || !fs::exists(res.csv_path) || fs::file_size(res.csv_path) == 0;
  std::ofstream csv(res.csv_path, fresh ? std::ios::trunc : std::ios::app);
  if (!csv) throw UsageError("cannot write metrics CSV '" + res.csv_path + "'");
  if (need_header) csv << "run_id,step,toy_fid,toy_cs,l_d,l_g,penalty,sim\n";
  csv.flush();

  std::string last_good = ckpt_path_for(cfg.run_dir, st.step);
  save_checkpoint(make_checkpoint(st), last_good);
  const uint64_t expect_frozen = frozen_weights_hash(st);

  for (int64_t step = st.step + 1; step <= cfg.steps; ++step) {
    try {
      for (int k = 1; k < cfg.d_steps_per_g; ++k) {
        const Batch extra = make_batch(cfg.batch_size, cfg.image_size, st.data_rng, st.text);
        d_update(st, extra);
      }
      const Batch batch = make_batch(cfg.batch_size, cfg.image_size, st.data_rng, st.text);
      if (step == 1) res.first_batch_hash = batch_hash(batch);
      const StepLosses ls = train_step(st, batch);
      if (!std::isfinite(ls.l_d) || !std::isfinite(ls.l_g) ||
          !std::isfinite(ls.penalty) || !std::isfinite(ls.sim)) {
        throw NumericError("non-finite loss at step " + std::to_string(step));
      }
      st.step = step;
      if (frozen_weights_hash(st) != expect_frozen) {
        throw std::runtime_error("frozen weights mutated during step " +
                                 std::to_string(step));
      }
      if (step % cfg.eval_interval == 0) {
        const EvalOut ev = run_eval(st, gcfg, es);
        char row[512];
        std::snprintf(row, sizeof(row), "%s,%lld,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                      res.run_id.c_str(), static_cast<long long>(step), ev.fid, ev.cs,
                      ls.l_d, ls.l_g, ls.penalty, ls.sim);
        csv << row;
        csv.flush();
        res.final_toy_fid = ev.fid;
        res.final_toy_cs = ev.cs;
        last_good = ckpt_path_for(cfg.run_dir, step);
        save_checkpoint(make_checkpoint(st), last_good);
      }
      if (step % cfg.image_interval == 0) {
        NoGradGuard ng;
        Rng irng(Rng::derive(cfg.seed, "image", static_cast<uint64_t>(step)));
        const int count = std::min(4, cfg.eval_size);
        for (int j = 0; j < count; ++j) {
          const Tensor img =
              generate(draw_noise(irng, cfg.noise_dim), es.ts[static_cast<size_t>(j)],
                       st.gen, gcfg);
          write_ppm(img, cfg.run_dir + "/images/step" + zero_pad(step, 6) + "_" +
                             std::to_string(j) + ".ppm");
        }
      }
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + "; last good checkpoint: " + last_good);
    }
  }

  res.final_checkpoint = cfg.run_dir + "/ckpt_final.rgc";
  save_checkpoint(make_checkpoint(st), res.final_checkpoint);
  res.steps_done = st.step;
  return res;
}

}  // namespace

TrainResult train(const TrainConfig& cfg) {
  TrainState st = init_train_state(cfg);
  return run_training(st, true);
}

TrainResult train_resume(const TrainConfig& cfg, const std::string& ckpt_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  require_same_run(cfg, ckpt);
  TrainState st = state_from_checkpoint(ckpt);
  st.cfg.run_dir = cfg.run_dir;
  return run_training(st, false);
}

namespace {

void mean_sd(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  sd = 0.0;
  if (xs.size() > 1) {
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    sd = std::sqrt(acc / static_cast<double>(xs.size() - 1));
  }
}

}  // namespace

AblateReport ablate(const TrainConfig& base, int num_seeds) {
  if (num_seeds < 1) throw UsageError("ablate: number of seeds must be >= 1");
  base.validate();
  if (base.steps % base.eval_interval != 0) {
    throw ConfigError("ablate: steps must be a multiple of eval_interval so every "
                      "run ends on an evaluation");
  }
  static const ConditioningMode kArms[3] = {ConditioningMode::cat, ConditioningMode::rat,
                                            ConditioningMode::rat_sa};
  AblateReport rep;
  rep.arms = {"cat", "rat", "rat_sa"};
  for (int a = 0; a < 3; ++a) {
    for (int j = 0; j < num_seeds; ++j) {
      TrainConfig cfg = base;
      cfg.mode = kArms[a];
      cfg.seed = base.seed + static_cast<uint64_t>(j);
      cfg.run_dir = base.run_dir + "/ablate_" + rep.arms[static_cast<size_t>(a)] +
                    "_s" + std::to_string(cfg.seed);
      const TrainResult r = train(cfg);
      rep.runs.push_back({rep.arms[static_cast<size_t>(a)], cfg.seed, r.final_toy_cs,
                          r.final_toy_fid, r.gen_param_count, r.first_batch_hash});
    }
  }

  std::ostringstream out;
  out << "arm,seed,toy_cs,toy_fid,gen_params,batch_hash\n";
  for (const AblateRun& r : rep.runs) {
    char line[256];
    std::snprintf(line, sizeof(line), "%s,%llu,%.6f,%.6f,%lld,%016llx\n",
                  r.arm.c_str(), static_cast<unsigned long long>(r.seed), r.toy_cs,
                  r.toy_fid, static_cast<long long>(r.gen_params),
                  static_cast<unsigned long long>(r.first_batch_hash));
    out << line;
  }
  out << "\narm,mean_toy_cs,sd_toy_cs,mean_toy_fid,sd_toy_fid\n";
  for (int a = 0; a < 3; ++a) {
    std::vector<double> cs, fid;
    for (int j = 0; j < num_seeds; ++j) {
      cs.push_back(rep.runs[static_cast<size_t>(a * num_seeds + j)].toy_cs);
      fid.push_back(rep.runs[static_cast<size_t>(a * num_seeds + j)].toy_fid);
    }
    double mc, sc, mf, sf;
    mean_sd(cs, mc, sc);
    mean_sd(fid, mf, sf);
    rep.mean_cs.push_back(mc);
    rep.sd_cs.push_back(sc);
    rep.mean_fid.push_back(mf);
    rep.sd_fid.push_back(sf);
    char line[256];
    std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%.6f,%.6f\n",
                  rep.arms[static_cast<size_t>(a)].c_str(), mc, sc, mf, sf);
    out << line;
  }
  {
    char line[256];
    std::snprintf(line, sizeof(line),
                  "\nverdict: mean toy_cs cat=%.4f rat=%.4f rat_sa=%.4f; "
                  "rat_sa >= rat: %s; rat_sa >= cat: %s\n",
                  rep.mean_cs[0], rep.mean_cs[1], rep.mean_cs[2],
                  rep.mean_cs[2] >= rep.mean_cs[1] ? "yes" : "no",
                  rep.mean_cs[2] >= rep.mean_cs[0] ? "yes" : "no");
    rep.verdict = line + 1;  // without the leading newline
    out << line;
  }
  rep.text = out.str();

  fs::create_directories(base.run_dir);
  std::ofstream f(base.run_dir + "/ablate_report.txt", std::ios::trunc);
  f << rep.text;
  return rep;
}

SweepReport sweep_hidden(const TrainConfig& base, const std::vector<int>& dims) {
  if (dims.empty()) throw UsageError("sweep: the list of hidden sizes is empty");
  if (base.steps % base.eval_interval != 0) {
    throw ConfigError("sweep: steps must be a multiple of eval_interval so every "
                      "run ends on an evaluation");
  }
  SweepReport rep;
  std::ostringstream out;
  out << "hidden,gen_params,toy_cs\n";
  for (int d : dims) {
    TrainConfig cfg = base;
    cfg.mode = ConditioningMode::rat;  // hidden size is the only moving part
    cfg.hidden_dim = d;
    cfg.run_dir = base.run_dir + "/sweep_h" + std::to_string(d);
    cfg.validate();
    const TrainResult r = train(cfg);
    rep.rows.push_back({d, r.gen_param_count, r.final_toy_cs});
    char line[128];
    std::snprintf(line, sizeof(line), "%d,%lld,%.6f\n", d,
                  static_cast<long long>(r.gen_param_count), r.final_toy_cs);
    out << line;
  }
  rep.text = out.str();
  fs::create_directories(base.run_dir);
  std::ofstream f(base.run_dir + "/sweep_report.txt", std::ios::trunc);
  f << rep.text;
  return rep;
}

std::vector<std::string> sample_images(const std::string& ckpt_path,
                                       const std::string& caption, int n,
                                       uint64_t seed, const std::string& out_dir) {
  if (n < 1) throw UsageError("sample: n must be >= 1");
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const TrainState st = state_from_checkpoint(ckpt);
  const Tensor t = encode_text(tokenize(caption), st.text);
  fs::create_directories(out_dir);
  const GeneratorConfig gcfg = st.cfg.generator_config();
  Rng zrng(seed);
  NoGradGuard ng;
  std::vector<std::string> paths;
  paths.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Tensor img = generate(draw_noise(zrng, st.cfg.noise_dim), t, st.gen, gcfg);
    std::string path = out_dir + "/sample_" + zero_pad(i, 3) + ".ppm";
    write_ppm(img, path);
    paths.push_back(std::move(path));
  }
  return paths;
}

EvalResult eval_checkpoint(const std::string& ckpt_path,
                           const std::string& dataset_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const TrainState st = state_from_checkpoint(ckpt);
  const Dataset ds = load_dataset(dataset_path);
  if (ds.image_size != st.cfg.image_size) {
    throw ConfigError("dataset image_size " + std::to_string(ds.image_size) +
                      " does not match checkpoint image_size " +
                      std::to_string(st.cfg.image_size));
  }
  if (ds.scenes.size() < 2) throw UsageError("eval: dataset needs at least 2 samples");

  const GeneratorConfig gcfg = st.cfg.generator_config();
  Rng zrng(Rng::derive(st.cfg.seed, "eval-sample"));
  NoGradGuard ng;
  std::vector<Tensor> ts, gen_imgs, gen_feats, real_feats;
  for (size_t i = 0; i < ds.scenes.size(); ++i) {
    const Scene& sc = ds.scenes[i];
    const Caption cap = caption_of(sc, sc.seed % kNumTemplates);
    Tensor t = encode_text(cap, st.text);
    Tensor img = generate(draw_noise(zrng, st.cfg.noise_dim), t, st.gen, gcfg);
    gen_feats.push_back(global_avg_pool(frozen_encode(img, st.enc)));
    real_feats.push_back(global_avg_pool(frozen_encode(ds.images[i], st.enc)));
    ts.push_back(std::move(t));
    gen_imgs.push_back(std::move(img));
  }
  EvalResult out;
  out.toy_fid = frechet_distance(feature_stats(real_feats), feature_stats(gen_feats));
  out.toy_cs = toy_clip_score(gen_imgs, ts, st.enc, st.proj);
  out.n = static_cast<int>(ds.scenes.size());
  return out;
}

}  // namespace ratgan
