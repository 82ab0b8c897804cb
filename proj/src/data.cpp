#include "ratgan/data.hpp"

#include "ratgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace ratgan {

const char* shape_word(Shape s) {
  switch (s) {
    case Shape::circle: return "circle";
    case Shape::square: return "square";
    case Shape::triangle: return "triangle";
  }
  return "";
}

const char* color_word(Color c) {
  switch (c) {
    case Color::red: return "red";
    case Color::green: return "green";
    case Color::blue: return "blue";
    case Color::yellow: return "yellow";
    case Color::purple: return "purple";
  }
  return "";
}

const char* size_word(SizeClass s) {
  return s == SizeClass::small_shape ? "small" : "large";
}

const char* position_word(Position p) {
  switch (p) {
    case Position::top: return "top";
    case Position::bottom: return "bottom";
    case Position::left: return "left";
    case Position::right: return "right";
    case Position::center: return "center";
  }
  return "";
}

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> vocab = [] {
    std::vector<std::string> v = {
        // attribute words
        "circle", "square", "triangle",                     //
        "red", "green", "blue", "yellow", "purple",         //
        "small", "large",                                   //
        "top", "bottom", "left", "right", "center",         //
        // glue words used by the caption templates
        "a", "the", "at", "there", "is", "sits", "drawn", "image", "shows",
        "colored", "and", "in"};
    std::sort(v.begin(), v.end());
    return v;
  }();
  return vocab;
}

std::string caption_text(const Caption& c) {
  std::string out;
  for (size_t i = 0; i < c.tokens.size(); ++i) {
    if (i) out += ' ';
    out += c.tokens[i];
  }
  return out;
}

Caption tokenize(const std::string& text) {
  Caption c;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) c.tokens.push_back(tok);
  return c;
}

Scene sample_scene(Rng& rng) {
  Scene s;
  s.shape = static_cast<Shape>(rng.uniform_int(kNumShapes));
  s.color = static_cast<Color>(rng.uniform_int(kNumColors));
  s.size = static_cast<SizeClass>(rng.uniform_int(kNumSizes));
  s.position = static_cast<Position>(rng.uniform_int(kNumPositions));
  s.seed = static_cast<int32_t>(rng.uniform_int(1 << 30));
  return s;
}

namespace {

struct Vec2 {
  double x, y;
};

Vec2 position_center(Position p) {
  switch (p) {
    case Position::top: return {0.5, 0.25};
    case Position::bottom: return {0.5, 0.75};
    case Position::left: return {0.25, 0.5};
    case Position::right: return {0.75, 0.5};
    case Position::center: return {0.5, 0.5};
  }
  return {0.5, 0.5};
}

// Channel triples in [-1,1] on the mid-gray (0,0,0) background.
const double kColorValues[kNumColors][3] = {
    {1.0, -1.0, -1.0},  // red
    {-1.0, 1.0, -1.0},  // green
    {-1.0, -1.0, 1.0},  // blue
    {1.0, 1.0, -1.0},   // yellow
    {0.6, -1.0, 0.6},   // purple
};

bool inside_shape(Shape shape, double x, double y, double cx, double cy, double r) {
  switch (shape) {
    case Shape::circle: {
      const double dx = x - cx, dy = y - cy;
      return dx * dx + dy * dy <= r * r;
    }
    case Shape::square:
      return std::fabs(x - cx) <= r && std::fabs(y - cy) <= r;
    case Shape::triangle: {
      // Upward-pointing isoceles: apex (cx, cy-r), base halfwidth r at cy+r.
      if (y < cy - r || y > cy + r) return false;
      return std::fabs(x - cx) <= (y - (cy - r)) * 0.5;
    }
  }
  return false;
}

}  // namespace

Tensor render_scene(const Scene& s, int size) {
  if (size < 16) {
    throw UsageError("render_scene: size must be >= 16, got " + std::to_string(size));
  }
  // Jitter is tiny (half a percent of the canvas) so mirrored positions stay
  // mirrored to within a pixel even at the largest supported raster.
  Rng jitter(static_cast<uint64_t>(s.seed));
  const Vec2 base = position_center(s.position);
  const double cx = base.x + (2.0 * jitter.uniform() - 1.0) * 0.005;
  const double cy = base.y + (2.0 * jitter.uniform() - 1.0) * 0.005;
  const double r = s.size == SizeClass::small_shape ? 0.12 : 0.22;
  const double* col = kColorValues[static_cast<int>(s.color)];

  constexpr int kSs = 4;  // supersamples per axis
  std::vector<double> img(static_cast<size_t>(3) * size * size, 0.0);
  const double inv = 1.0 / (kSs * static_cast<double>(size));
  for (int row = 0; row < size; ++row) {
    for (int colx = 0; colx < size; ++colx) {
      int hits = 0;
      for (int i = 0; i < kSs; ++i) {
        for (int j = 0; j < kSs; ++j) {
          const double y = (row * kSs + i + 0.5) * inv;
          const double x = (colx * kSs + j + 0.5) * inv;
          if (inside_shape(s.shape, x, y, cx, cy, r)) ++hits;
        }
      }
      const double coverage = hits / static_cast<double>(kSs * kSs);
      for (int ch = 0; ch < 3; ++ch) {
        img[(static_cast<size_t>(ch) * size + row) * size + colx] = coverage * col[ch];
      }
    }
  }
  return Tensor::from_data({3, size, size}, std::move(img));
}

Caption caption_of(const Scene& s, int template_id) {
  if (template_id < 0 || template_id >= kNumTemplates) {
    throw UsageError("caption_of: template_id must be in [0, 9], got " +
                     std::to_string(template_id));
  }
  const std::string sh = shape_word(s.shape);
  const std::string co = color_word(s.color);
  const std::string si = size_word(s.size);
  const std::string po = position_word(s.position);
  switch (template_id) {
    case 0: return {{"a", si, co, sh, "at", "the", po}};
    case 1: return {{"the", si, co, sh, "sits", "at", "the", po}};
    case 2: return {{"there", "is", "a", si, co, sh, "at", "the", po}};
    case 3: return {{"a", co, sh, "drawn", si, "at", "the", po}};
    case 4: return {{"the", "image", "shows", "a", si, co, sh, "at", "the", po}};
    case 5: return {{"a", si, sh, "colored", co, "at", "the", po}};
    case 6: return {{"the", co, sh, "is", si, "and", "at", "the", po}};
    case 7: return {{"at", "the", po, "sits", "a", si, co, sh}};
    case 8: return {{"a", si, co, sh, "in", "the", po}};
    case 9: return {{"the", po, "shows", "a", si, co, sh}};
  }
  return {};
}

TextEncoder make_text_encoder(uint64_t seed, int dim) {
  if (dim < 1) throw ConfigError("text encoder: dim must be >= 1");
  Rng rng(seed);
  const int v = static_cast<int>(vocabulary().size());
  std::vector<double> table(static_cast<size_t>(v) * dim);
  for (double& x : table) x = rng.normal();
  TextEncoder enc;
  enc.table = Tensor::from_data({v, dim}, std::move(table));
  enc.dim = dim;
  enc.seed = seed;
  return enc;
}

namespace {

int vocab_index(const std::string& token) {
  static const std::unordered_map<std::string, int> index = [] {
    std::unordered_map<std::string, int> m;
    const auto& v = vocabulary();
    for (size_t i = 0; i < v.size(); ++i) m[v[i]] = static_cast<int>(i);
    return m;
  }();
  auto it = index.find(token);
  if (it == index.end()) {
    std::string msg = "unknown token '" + token + "'; vocabulary:";
    for (const std::string& w : vocabulary()) msg += " " + w;
    throw VocabError(msg);
  }
  return it->second;
}

}  // namespace

Tensor encode_text(const Caption& c, const TextEncoder& enc) {
  if (c.tokens.empty()) throw UsageError("encode_text: empty caption");
  std::vector<double> pooled(static_cast<size_t>(enc.dim), 0.0);
  for (const std::string& tok : c.tokens) {
    const int row = vocab_index(tok);
    const double* src = enc.table.data().data() + static_cast<size_t>(row) * enc.dim;
    for (int k = 0; k < enc.dim; ++k) pooled[static_cast<size_t>(k)] += src[k];
  }
  double norm2 = 0.0;
  for (double& v : pooled) {
    v /= static_cast<double>(c.tokens.size());
    norm2 += v * v;
  }
  if (norm2 == 0.0) throw NumericError("encode_text: degenerate zero embedding");
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : pooled) v *= inv;
  return Tensor::from_data({enc.dim}, std::move(pooled));
}

namespace {

std::vector<int> derangement(int n, Rng& rng) {
  std::vector<int> idx(static_cast<size_t>(n));
  while (true) {
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(rng.uniform_int(i + 1))]);
    }
    bool fixed = false;
    for (int i = 0; i < n; ++i) {
      if (idx[static_cast<size_t>(i)] == i) {
        fixed = true;
        break;
      }
    }
    if (!fixed) return idx;
  }
}

}  // namespace

Batch make_batch(int n, int image_size, Rng& rng, const TextEncoder& enc) {
  if (n < 2) {
    throw UsageError("make_batch: need n >= 2 for a mismatched pairing, got " +
                     std::to_string(n));
  }
  Batch b;
  b.scenes.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    Scene s = sample_scene(rng);
    Caption c = caption_of(s, rng.uniform_int(kNumTemplates));
    b.scenes.push_back(s);
    b.captions.push_back(c);
    b.images.push_back(render_scene(s, image_size));
    b.t_matched.push_back(encode_text(c, enc));
  }
  b.mis_index = derangement(n, rng);
  for (int i = 0; i < n; ++i) {
    b.t_mismatched.push_back(b.t_matched[static_cast<size_t>(b.mis_index[static_cast<size_t>(i)])]);
  }
  return b;
}

namespace {

constexpr char kMagic[4] = {'R', 'A', 'T', 'D'};
constexpr uint8_t kVersion = 1;

void write_u32(std::ofstream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("dataset: truncated file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void dump_dataset(const Dataset& ds, const std::string& path) {
  if (ds.scenes.size() != ds.images.size()) {
    throw UsageError("dump_dataset: scene/image count mismatch");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("dataset: cannot open '" + path + "' for writing");
  out.write(kMagic, 4);
  out.put(static_cast<char>(kVersion));
  write_u32(out, static_cast<uint32_t>(ds.scenes.size()));
  write_u32(out, static_cast<uint32_t>(ds.image_size));
  const size_t pixels = static_cast<size_t>(3) * ds.image_size * ds.image_size;
  for (size_t i = 0; i < ds.scenes.size(); ++i) {
    const Scene& s = ds.scenes[i];
    out.put(static_cast<char>(static_cast<int>(s.shape)));
    out.put(static_cast<char>(static_cast<int>(s.color)));
    out.put(static_cast<char>(static_cast<int>(s.size)));
    out.put(static_cast<char>(static_cast<int>(s.position)));
    write_u32(out, static_cast<uint32_t>(s.seed));
    const Tensor& img = ds.images[i];
    if (img.size() != static_cast<int64_t>(pixels)) {
      throw UsageError("dump_dataset: image " + std::to_string(i) +
                       " does not match the dataset image size");
    }
    out.write(reinterpret_cast<const char*>(img.data().data()),
              static_cast<std::streamsize>(pixels * sizeof(double)));
  }
  if (!out) throw FormatError("dataset: write failed for '" + path + "'");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("dataset: cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("dataset: bad magic in '" + path + "'");
  }
  const int version = in.get();
  if (version != kVersion) {
    throw FormatError("dataset: unsupported version " + std::to_string(version));
  }
  const uint32_t count = read_u32(in);
  const uint32_t size = read_u32(in);
  if (size < 16 || size > 4096) {
    throw FormatError("dataset: implausible image size " + std::to_string(size));
  }
  Dataset ds;
  ds.image_size = static_cast<int>(size);
  const size_t pixels = static_cast<size_t>(3) * size * size;
  for (uint32_t i = 0; i < count; ++i) {
    unsigned char attr[4];
    in.read(reinterpret_cast<char*>(attr), 4);
    if (!in) throw FormatError("dataset: truncated scene record");
    if (attr[0] >= kNumShapes || attr[1] >= kNumColors || attr[2] >= kNumSizes ||
        attr[3] >= kNumPositions) {
      throw FormatError("dataset: scene attribute out of range");
    }
    Scene s;
    s.shape = static_cast<Shape>(attr[0]);
    s.color = static_cast<Color>(attr[1]);
    s.size = static_cast<SizeClass>(attr[2]);
    s.position = static_cast<Position>(attr[3]);
    s.seed = static_cast<int32_t>(read_u32(in));
    std::vector<double> img(pixels);
    in.read(reinterpret_cast<char*>(img.data()),
            static_cast<std::streamsize>(pixels * sizeof(double)));
    if (!in) throw FormatError("dataset: truncated raster data");
    ds.scenes.push_back(s);
    ds.images.push_back(
        Tensor::from_data({3, ds.image_size, ds.image_size}, std::move(img)));
  }
  return ds;
}

}  // namespace ratgan
