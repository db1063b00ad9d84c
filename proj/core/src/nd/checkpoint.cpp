#include "abmix/nd/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "abmix/errors.hpp"

namespace abmix::nd {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double d) { put_u64(os, std::bit_cast<std::uint64_t>(d)); }

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

constexpr char kMagic[4] = {'A', 'B', 'M', 'X'};

}  // namespace

void save_checkpoint(const ParamStore& store, const std::string& path, bool include_moments) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("save_checkpoint: cannot open " + path);
  os.write(kMagic, 4);
  put_u32(os, kCheckpointVersion);
  put_u32(os, include_moments ? 1u : 0u);
  put_u64(os, store.step_count());
  put_u64(os, store.size());
  for (const auto& [name, e] : store) {
    put_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(os, static_cast<std::uint32_t>(e.w.ndim()));
    for (std::size_t d : e.w.shape()) put_u64(os, d);
  }
  for (const auto& [name, e] : store) {
    for (double v : e.w.vec()) put_f64(os, v);
    if (include_moments) {
      if (e.m.size() != e.w.size())
        throw ContractError("save_checkpoint: moments requested but absent for " + name);
      for (double v : e.m.vec()) put_f64(os, v);
      for (double v : e.v.vec()) put_f64(os, v);
    }
  }
  if (!os) throw IoError("save_checkpoint: write failed for " + path);
}

void load_checkpoint(ParamStore& store, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load_checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("load_checkpoint: bad magic in " + path);
  const std::uint32_t version = get_u32(is);
  if (version != kCheckpointVersion) throw IoError("load_checkpoint: unsupported version");
  const bool has_moments = (get_u32(is) & 1u) != 0;
  const std::uint64_t steps = get_u64(is);
  const std::uint64_t n = get_u64(is);
  struct Meta {
    std::string name;
    std::vector<std::size_t> shape;
  };
  std::vector<Meta> metas(n);
  for (auto& m : metas) {
    const std::uint32_t len = get_u32(is);
    m.name.resize(len);
    is.read(m.name.data(), len);
    const std::uint32_t nd = get_u32(is);
    m.shape.resize(nd);
    for (auto& d : m.shape) d = static_cast<std::size_t>(get_u64(is));
  }
  for (const auto& m : metas) {
    Tensor w(m.shape);
    for (double& v : w.vec()) v = get_f64(is);
    Tensor mm, vv;
    if (has_moments) {
      mm = Tensor(m.shape);
      for (double& v : mm.vec()) v = get_f64(is);
      vv = Tensor(m.shape);
      for (double& v : vv.vec()) v = get_f64(is);
    }
    if (store.has(m.name)) {
      auto& e = store.at(m.name);
      if (!e.w.same_shape(w))
        throw DimensionError("load_checkpoint: shape mismatch for " + m.name);
      e.w = std::move(w);
      e.m = std::move(mm);
      e.v = std::move(vv);
    } else {
      auto& e = store.create(m.name, std::move(w));
      e.m = std::move(mm);
      e.v = std::move(vv);
    }
  }
  if (!is) throw IoError("load_checkpoint: truncated file " + path);
  store.set_step_count(steps);
}

}  // namespace abmix::nd
