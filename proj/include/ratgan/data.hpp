#pragma once

#include "ratgan/ops.hpp"
#include "ratgan/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ratgan {

enum class Shape { circle, square, triangle };
enum class Color { red, green, blue, yellow, purple };
enum class SizeClass { small_shape, large_shape };
enum class Position { top, bottom, left, right, center };

constexpr int kNumShapes = 3;
constexpr int kNumColors = 5;
constexpr int kNumSizes = 2;
constexpr int kNumPositions = 5;
constexpr int kNumTemplates = 10;

// One procedurally generated sample: attributes plus the jitter seed that
// fixes its rasterization.
struct Scene {
  Shape shape = Shape::circle;
  Color color = Color::red;
  SizeClass size = SizeClass::small_shape;
  Position position = Position::center;
  int32_t seed = 0;
};

struct Caption {
  std::vector<std::string> tokens;
  bool operator==(const Caption& o) const { return tokens == o.tokens; }
};

const char* shape_word(Shape s);
const char* color_word(Color c);
const char* size_word(SizeClass s);
const char* position_word(Position p);

// The closed word list every caption draws from, sorted.
const std::vector<std::string>& vocabulary();

std::string caption_text(const Caption& c);
Caption tokenize(const std::string& text);

// Uniform over the attribute grid; the rng also supplies the jitter seed.
Scene sample_scene(Rng& rng);

// Anti-aliased raster (4x supersampled, box downsampled) of the scene on a
// mid-gray background; channels in [-1,1], shape [3,size,size].
Tensor render_scene(const Scene& s, int size);

// One of ten templated sentences describing the scene.
Caption caption_of(const Scene& s, int template_id);

// Frozen seeded embedding table; lookups are mean-pooled and L2-normalized.
struct TextEncoder {
  Tensor table;  // [vocab, dim], never trained
  int dim = 0;
  uint64_t seed = 0;
};

TextEncoder make_text_encoder(uint64_t seed, int dim);

// -> unit-norm sentence vector [dim]; unknown tokens raise VocabError.
Tensor encode_text(const Caption& c, const TextEncoder& enc);

struct Batch {
  std::vector<Scene> scenes;
  std::vector<Caption> captions;
  std::vector<Tensor> images;        // each [3,S,S]
  std::vector<Tensor> t_matched;     // own caption
  std::vector<Tensor> t_mismatched;  // derangement of the batch's captions
  std::vector<int> mis_index;        // mis_index[i] != i always
};

// n >= 2 (a derangement must exist).
Batch make_batch(int n, int image_size, Rng& rng, const TextEncoder& enc);

struct Dataset {
  int image_size = 0;
  std::vector<Scene> scenes;
  std::vector<Tensor> images;
};

// Self-describing binary: magic "RATD", version byte, count, image size,
// then per-sample scene record + raw raster.
void dump_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace ratgan
