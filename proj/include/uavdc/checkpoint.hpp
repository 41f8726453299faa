// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "uavdc/autodiff.hpp"
#include "uavdc/common.hpp"
#include "uavdc/nn.hpp"

namespace uavdc::nn {

// Binary parameter container: a metadata string (model config JSON) with
// its hash, then named float64 blobs with shapes. Round-trips bitwise.
//
//   magic "UAVDCKP1" | u64 meta_hash | u64 meta_len | meta bytes
//   u64 n_params | per param: u64 name_len, name, tag "f64 ",
//                  u64 rows, u64 cols, rows*cols little-endian doubles

struct CheckpointBlob {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
};

struct Checkpoint {
  std::string meta;
  std::uint64_t meta_hash = 0;
  std::vector<CheckpointBlob> blobs;

  const CheckpointBlob* find(const std::string& name) const {
    for (const CheckpointBlob& b : blobs) {
      if (b.name == name) return &b;
    }
    return nullptr;
  }
};

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64(const std::string& in, std::size_t& at) {
  if (at + 8 > in.size()) throw ValidationError("truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at++])) << (8 * i);
  return v;
}

inline void put_f64(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

inline double get_f64(const std::string& in, std::size_t& at) {
  const std::uint64_t bits = get_u64(in, at);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace detail

inline std::string serialize_checkpoint(const std::string& meta, const ParamStore& store) {
  std::string out = "UAVDCKP1";
  detail::put_u64(out, fnv1a64(meta));
  detail::put_u64(out, meta.size());
  out += meta;
  detail::put_u64(out, store.all().size());
  for (const ad::Var& p : store.all()) {
    detail::put_u64(out, p->name.size());
    out += p->name;
    out += "f64 ";
    detail::put_u64(out, p->value.rows());
    detail::put_u64(out, p->value.cols());
    for (double d : p->value.vec()) detail::put_f64(out, d);
  }
  return out;
}

inline void save_checkpoint(const std::string& path, const std::string& meta,
                            const ParamStore& store) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
  const std::string bytes = serialize_checkpoint(meta, store);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline Checkpoint parse_checkpoint(const std::string& bytes) {
  Checkpoint ck;
  if (bytes.size() < 8 || bytes.compare(0, 8, "UAVDCKP1") != 0) {
    throw ValidationError("not a checkpoint file");
  }
  std::size_t at = 8;
  ck.meta_hash = detail::get_u64(bytes, at);
  const std::uint64_t meta_len = detail::get_u64(bytes, at);
  if (at + meta_len > bytes.size()) throw ValidationError("truncated checkpoint");
  ck.meta = bytes.substr(at, meta_len);
  at += meta_len;
  if (fnv1a64(ck.meta) != ck.meta_hash) throw ValidationError("checkpoint config hash mismatch");
  const std::uint64_t n = detail::get_u64(bytes, at);
  for (std::uint64_t i = 0; i < n; ++i) {
    CheckpointBlob blob;
    const std::uint64_t name_len = detail::get_u64(bytes, at);
    if (at + name_len + 4 > bytes.size()) throw ValidationError("truncated checkpoint");
    blob.name = bytes.substr(at, name_len);
    at += name_len;
    if (bytes.compare(at, 4, "f64 ") != 0) throw ValidationError("unsupported checkpoint dtype");
    at += 4;
    blob.rows = detail::get_u64(bytes, at);
    blob.cols = detail::get_u64(bytes, at);
    blob.data.resize(blob.rows * blob.cols);
    for (double& d : blob.data) d = detail::get_f64(bytes, at);
    ck.blobs.push_back(std::move(blob));
  }
  return ck;
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open checkpoint: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

// Loads blob values into a parameter store with matching names and shapes.
// With allow_missing, parameters absent from the checkpoint keep their
// initialization (how fresh LoRA adapters join a trained backbone).
inline void restore_params(const Checkpoint& ck, ParamStore& store, bool allow_missing = false) {
  for (const ad::Var& p : store.all()) {
    const CheckpointBlob* blob = ck.find(p->name);
    if (blob == nullptr) {
      if (allow_missing) continue;
      throw ValidationError("checkpoint is missing parameter '" + p->name + "'");
    }
    if (blob->rows != p->value.rows() || blob->cols != p->value.cols()) {
      throw ValidationError("checkpoint shape mismatch for '" + p->name + "'");
    }
    p->value.vec() = blob->data;
  }
}

}  // namespace uavdc::nn
