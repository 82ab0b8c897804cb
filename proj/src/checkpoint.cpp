#include "ratgan/checkpoint.hpp"

#include "ratgan/errors.hpp"

#include <bit>
#include <cstdio>
#include <cstring>

namespace ratgan {

namespace {

constexpr char kMagic[4] = {'R', 'G', 'C', 'K'};

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

void put_string(std::string& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.append(s);
}

void put_rng(std::string& out, const RngState& st) {
  for (uint64_t w : st.s) put_u64(out, w);
  put_f64(out, st.cached);
  out.push_back(st.has_cached ? 1 : 0);
}

struct Reader {
  const std::string& buf;
  size_t at = 0;

  void need(size_t n) const {
    if (at + n > buf.size()) throw FormatError("truncated checkpoint");
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[at + i])) << (8 * i);
    at += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[at + i])) << (8 * i);
    at += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const uint32_t n = u32();
    need(n);
    std::string s = buf.substr(at, n);
    at += n;
    return s;
  }
  RngState rng() {
    RngState st;
    for (uint64_t& w : st.s) w = u64();
    st.cached = f64();
    need(1);
    st.has_cached = buf[at++] != 0;
    return st;
  }
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, ckpt.version);
  put_string(out, format_config_identity(ckpt.config));
  put_u64(out, static_cast<uint64_t>(ckpt.step));
  put_rng(out, ckpt.data_rng);
  put_rng(out, ckpt.noise_rng);
  put_u64(out, static_cast<uint64_t>(ckpt.opt_g_t));
  put_u64(out, static_cast<uint64_t>(ckpt.opt_d_t));
  put_u32(out, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    put_string(out, name);
    put_u32(out, static_cast<uint32_t>(t.shape().size()));
    for (int d : t.shape()) put_u32(out, static_cast<uint32_t>(d));
    for (double v : t.data()) put_f64(out, v);
  }

  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw UsageError("cannot write checkpoint '" + path + "'");
  const size_t written = std::fwrite(out.data(), 1, out.size(), f);
  const bool ok = written == out.size() && std::fclose(f) == 0;
  if (!ok) throw UsageError("short write on checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw UsageError("cannot open checkpoint '" + path + "'");
  std::string buf;
  char chunk[1 << 16];
  size_t got;
  while ((got = std::fread(chunk, 1, sizeof(chunk), f)) > 0) buf.append(chunk, got);
  std::fclose(f);

  Reader r{buf};
  r.need(4);
  if (std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw FormatError("not a checkpoint file (bad magic): '" + path + "'");
  }
  r.at = 4;
  Checkpoint ckpt;
  ckpt.version = r.u32();
  if (ckpt.version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(ckpt.version));
  }
  ckpt.config = parse_config_text(r.str());
  ckpt.step = static_cast<int64_t>(r.u64());
  ckpt.data_rng = r.rng();
  ckpt.noise_rng = r.rng();
  ckpt.opt_g_t = static_cast<int64_t>(r.u64());
  ckpt.opt_d_t = static_cast<int64_t>(r.u64());
  const uint32_t count = r.u32();
  ckpt.tensors.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    const uint32_t rank = r.u32();
    if (rank > 8) throw FormatError("implausible tensor rank in checkpoint");
    std::vector<int> shape(rank);
    int64_t n = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      shape[d] = static_cast<int>(r.u32());
      if (shape[d] <= 0) throw FormatError("bad tensor dimension in checkpoint");
      n *= shape[d];
    }
    std::vector<double> data(static_cast<size_t>(n));
    for (double& v : data) v = r.f64();
    ckpt.tensors.emplace_back(std::move(name),
                              Tensor::from_data(std::move(shape), std::move(data)));
  }
  if (r.at != buf.size()) {
    throw FormatError("trailing bytes after checkpoint payload");
  }
  return ckpt;
}

const Tensor& checkpoint_tensor(const Checkpoint& ckpt, const std::string& name) {
  for (const auto& [n, t] : ckpt.tensors) {
    if (n == name) return t;
  }
  throw FormatError("checkpoint is missing tensor '" + name + "'");
}

}  // namespace ratgan
