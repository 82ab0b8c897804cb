#include "ratgan/config.hpp"

#include "ratgan/errors.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace ratgan {

const char* mode_word(ConditioningMode m) {
  switch (m) {
    case ConditioningMode::cat: return "cat";
    case ConditioningMode::rat: return "rat";
    case ConditioningMode::rat_sa: return "rat_sa";
  }
  throw ConfigError("mode_word: bad enum value");
}

ConditioningMode parse_mode(const std::string& word) {
  if (word == "cat") return ConditioningMode::cat;
  if (word == "rat") return ConditioningMode::rat;
  if (word == "rat_sa") return ConditioningMode::rat_sa;
  throw ConfigError("unknown conditioning mode '" + word +
                    "' (expected cat, rat, or rat_sa)");
}

const char* placement_word(SaPlacement p) {
  switch (p) {
    case SaPlacement::none: return "none";
    case SaPlacement::per_pair: return "per_pair";
    case SaPlacement::after_first: return "after_first";
  }
  throw ConfigError("placement_word: bad enum value");
}

static SaPlacement parse_placement(const std::string& word) {
  if (word == "per_pair") return SaPlacement::per_pair;
  if (word == "after_first") return SaPlacement::after_first;
  throw ConfigError("unknown sa_placement '" + word +
                    "' (expected per_pair or after_first)");
}

GeneratorConfig TrainConfig::generator_config() const {
  GeneratorConfig g;
  g.noise_dim = noise_dim;
  g.sentence_dim = sentence_dim;
  g.hidden_dim = hidden_dim;
  g.num_rat_blocks = num_rat_blocks;
  g.base_channels = base_channels;
  g.image_size = image_size;
  g.sa_groups = sa_groups;
  g.conditioning =
      mode == ConditioningMode::cat ? Conditioning::cat : Conditioning::rat;
  g.sa_placement =
      mode == ConditioningMode::rat_sa ? sa_placement : SaPlacement::none;
  return g;
}

DiscriminatorConfig TrainConfig::discriminator_config() const {
  DiscriminatorConfig d;
  d.sentence_dim = sentence_dim;
  d.fe_channels = fe_channels;
  d.referee_channels = referee_channels;
  return d;
}

LossHyperparams TrainConfig::loss_hp() const {
  LossHyperparams hp;
  hp.k = penalty_k;
  hp.p = penalty_p;
  hp.lambda = sim_lambda;
  return hp;
}

void TrainConfig::validate() const {
  if (!(lr_g > 0.0)) throw ConfigError("lr_g must be > 0");
  if (!(lr_d > 0.0)) throw ConfigError("lr_d must be > 0");
  if (beta1 < 0.0 || beta1 >= 1.0) throw ConfigError("beta1 must lie in [0,1)");
  if (beta2 < 0.0 || beta2 >= 1.0) throw ConfigError("beta2 must lie in [0,1)");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (d_steps_per_g < 1) throw ConfigError("d_steps_per_g must be >= 1");
  if (eval_interval < 1) throw ConfigError("eval_interval must be >= 1");
  if (image_interval < 1) throw ConfigError("image_interval must be >= 1");
  if (eval_size < 2) throw ConfigError("eval_size must be >= 2");
  if (sa_placement == SaPlacement::none) {
    throw ConfigError("sa_placement must be per_pair or after_first");
  }
  if (run_dir.empty()) throw ConfigError("run_dir must not be empty");
  loss_hp().validate();
  generator_config().validate();
  discriminator_config().validate();
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("bad numeric value '" + s + "' for key '" + key + "'");
  }
  return v;
}

int to_int(const std::string& key, const std::string& s) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("bad integer value '" + s + "' for key '" + key + "'");
  }
  return v;
}

uint64_t to_u64(const std::string& key, const std::string& s) {
  uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("bad unsigned value '" + s + "' for key '" + key + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// One row of the key table: how to print the field and how to set it. Keys
// marked identity=false (bookkeeping like run_dir) are excluded from the
// checkpoint snapshot and from mismatch comparison, so a run resumed into a
// different directory is still the same run.
struct KeySpec {
  const char* key;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string&)> set;
  bool identity = true;
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"mode", [](const TrainConfig& c) { return std::string(mode_word(c.mode)); },
       [](TrainConfig& c, const std::string& v) { c.mode = parse_mode(v); }},
      {"sa_placement",
       [](const TrainConfig& c) { return std::string(placement_word(c.sa_placement)); },
       [](TrainConfig& c, const std::string& v) { c.sa_placement = parse_placement(v); }},
#define INT_KEY(name) \
  {#name, [](const TrainConfig& c) { return std::to_string(c.name); }, \
   [](TrainConfig& c, const std::string& v) { c.name = to_int(#name, v); }}
#define DBL_KEY(name) \
  {#name, [](const TrainConfig& c) { return fmt_double(c.name); }, \
   [](TrainConfig& c, const std::string& v) { c.name = to_double(#name, v); }}
#define U64_KEY(name) \
  {#name, [](const TrainConfig& c) { return std::to_string(c.name); }, \
   [](TrainConfig& c, const std::string& v) { c.name = to_u64(#name, v); }}
      INT_KEY(noise_dim),
      INT_KEY(sentence_dim),
      INT_KEY(hidden_dim),
      INT_KEY(num_rat_blocks),
      INT_KEY(base_channels),
      INT_KEY(image_size),
      INT_KEY(sa_groups),
      INT_KEY(fe_channels),
      INT_KEY(referee_channels),
      DBL_KEY(penalty_k),
      DBL_KEY(penalty_p),
      DBL_KEY(sim_lambda),
      DBL_KEY(lr_g),
      DBL_KEY(lr_d),
      DBL_KEY(beta1),
      DBL_KEY(beta2),
      INT_KEY(batch_size),
      INT_KEY(steps),
      INT_KEY(d_steps_per_g),
      INT_KEY(eval_interval),
      INT_KEY(image_interval),
      INT_KEY(eval_size),
      U64_KEY(seed),
      U64_KEY(encoder_seed),
      U64_KEY(text_seed),
      U64_KEY(proj_seed),
#undef INT_KEY
#undef DBL_KEY
#undef U64_KEY
      {"run_dir", [](const TrainConfig& c) { return c.run_dir; },
       [](TrainConfig& c, const std::string& v) { c.run_dir = v; }, false},
  };
  return table;
}

}  // namespace

std::string format_config(const TrainConfig& cfg) {
  std::ostringstream out;
  for (const KeySpec& k : key_table()) out << k.key << " = " << k.get(cfg) << "\n";
  return out.str();
}

std::string format_config_identity(const TrainConfig& cfg) {
  std::ostringstream out;
  for (const KeySpec& k : key_table()) {
    if (k.identity) out << k.key << " = " << k.get(cfg) << "\n";
  }
  return out.str();
}

TrainConfig parse_config_text(const std::string& text) {
  TrainConfig cfg;
  std::map<std::string, const KeySpec*> by_key;
  for (const KeySpec& k : key_table()) by_key[k.key] = &k;
  std::set<std::string> seen;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        " has no '=': '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = by_key.find(key);
    if (it == by_key.end()) {
      throw ConfigError("unknown config key '" + key + "' on line " +
                        std::to_string(lineno));
    }
    if (!seen.insert(key).second) {
      throw ConfigError("duplicate config key '" + key + "' on line " +
                        std::to_string(lineno));
    }
    it->second->set(cfg, value);
  }
  return cfg;
}

TrainConfig parse_config_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw UsageError("cannot open config file '" + path + "'");
  std::string text;
  char buf[4096];
  size_t got;
  while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, got);
  std::fclose(f);
  return parse_config_text(text);
}

std::string first_config_mismatch(const TrainConfig& a, const TrainConfig& b) {
  for (const KeySpec& k : key_table()) {
    if (k.identity && k.get(a) != k.get(b)) return k.key;
  }
  return "";
}

}  // namespace ratgan
