#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spr/error.hpp"
#include "spr/labels.hpp"
#include "spr/prototypes.hpp"
#include "spr/tensor.hpp"

namespace spr {

// SPRT container: magic "SPRT", u8 version (=1), u8 rank, little-endian u32
// dims[rank], then the payload row-major. Tensors carry f32 payloads; label
// maps reuse the container with a u32 payload (IGNORE = 0xFFFFFFFF).
inline constexpr char kSprtMagic[4] = {'S', 'P', 'R', 'T'};
inline constexpr uint8_t kSprtVersion = 1;

namespace detail {

inline void put_u32_le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

inline uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline std::string sprt_header(const std::vector<int>& dims) {
  std::string out;
  out.append(kSprtMagic, 4);
  out.push_back(static_cast<char>(kSprtVersion));
  out.push_back(static_cast<char>(dims.size()));
  for (int d : dims) put_u32_le(out, static_cast<uint32_t>(d));
  return out;
}

inline std::vector<int> read_sprt_header(std::istream& in, const std::string& path) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kSprtMagic, 4) != 0) {
    throw IoError(path + ": not an SPRT file");
  }
  char version = 0, rank = 0;
  in.get(version);
  in.get(rank);
  if (!in || version != kSprtVersion) {
    throw IoError(path + ": unsupported SPRT version");
  }
  if (rank < 1 || rank > 4) throw IoError(path + ": bad SPRT rank");
  std::vector<int> dims(static_cast<size_t>(rank));
  for (auto& d : dims) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw IoError(path + ": truncated SPRT header");
    d = static_cast<int>(get_u32_le(buf));
    if (d < 1) throw IoError(path + ": bad SPRT extent");
  }
  return dims;
}

}  // namespace detail

// Writes bytes to a temp file in the target directory, then renames it into
// place. Readers never observe a partial file.
inline void atomic_write(const std::string& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

inline void write_tensor(const std::string& path, const Tensor& t) {
  std::string bytes = detail::sprt_header(t.dims());
  bytes.reserve(bytes.size() + t.size() * 4);
  for (float v : t.data()) {
    uint32_t u;
    std::memcpy(&u, &v, 4);
    detail::put_u32_le(bytes, u);
  }
  atomic_write(path, bytes);
}

inline Tensor read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<int> dims = detail::read_sprt_header(in, path);
  size_t count = 1;
  for (int d : dims) count *= static_cast<size_t>(d);
  std::vector<float> data(count);
  for (size_t i = 0; i < count; ++i) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw IoError(path + ": truncated SPRT payload");
    const uint32_t u = detail::get_u32_le(buf);
    std::memcpy(&data[i], &u, 4);
  }
  return Tensor(std::move(dims), std::move(data));
}

inline void write_labels(const std::string& path, const LabelMap& labels) {
  std::string bytes = detail::sprt_header({labels.h, labels.w});
  bytes.reserve(bytes.size() + labels.size() * 4);
  for (uint32_t id : labels.ids) detail::put_u32_le(bytes, id);
  atomic_write(path, bytes);
}

inline LabelMap read_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<int> dims = detail::read_sprt_header(in, path);
  if (dims.size() != 2) throw IoError(path + ": label map must be rank 2");
  LabelMap labels(dims[0], dims[1]);
  for (size_t i = 0; i < labels.size(); ++i) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw IoError(path + ": truncated label payload");
    labels[i] = detail::get_u32_le(buf);
  }
  return labels;
}

// PrototypeState = SPRT tensor (D x C) plus a line-based sidecar:
//   valid: 1 0 1 ...
//   gamma: 0.5
inline void write_prototypes(const std::string& tensor_path, const std::string& sidecar_path,
                             const PrototypeState& state) {
  write_tensor(tensor_path, state.p);
  std::ostringstream os;
  os << "valid:";
  for (bool v : state.valid) os << ' ' << (v ? 1 : 0);
  os << "\ngamma: " << state.gamma << "\n";
  atomic_write(sidecar_path, os.str());
}

inline PrototypeState read_prototypes(const std::string& tensor_path,
                                      const std::string& sidecar_path) {
  PrototypeState state;
  state.p = read_tensor(tensor_path);
  require_rank(state.p, 2, "read_prototypes");
  state.valid.assign(static_cast<size_t>(state.p.dim(1)), true);

  std::ifstream in(sidecar_path);
  if (!in) throw IoError("cannot open " + sidecar_path);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "valid:") {
      int flag = 0;
      size_t i = 0;
      while (ls >> flag && i < state.valid.size()) state.valid[i++] = (flag != 0);
      if (i != state.valid.size()) {
        throw IoError(sidecar_path + ": validity flags do not match class count");
      }
    } else if (key == "gamma:") {
      ls >> state.gamma;
    }
  }
  return state;
}

}  // namespace spr
