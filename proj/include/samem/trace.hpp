#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "samem/embedding.hpp"
#include "samem/error.hpp"
#include "samem/rng.hpp"
#include "samem/version.hpp"

namespace samem {

// Planar pose carried alongside a frame. Meters for x/y, degrees for heading.
struct TracePose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  friend bool operator==(const TracePose&, const TracePose&) = default;
};

// A serialized episode: instruction embedding, per-frame embeddings, optional
// poses and action labels, and a free-form JSON metadata blob (image size,
// resize ratio and similar carried-through settings live here).
//
// Binary layout (little-endian), version 1:
//   magic "SAMEMTR1"                      8 bytes
//   u32 version                           =1
//   u32 dim
//   u32 frame count
//   u32 instruction token count
//   u8  flags                             bit0 poses, bit1 actions
//   f32 instruction tokens                count * dim
//   per frame:
//     u32 token count
//     f32 tokens                          count * dim
//     f32 x, y, heading                   if bit0
//     u8  action label                    if bit1
//   u32 metadata length
//   UTF-8 JSON metadata
//
// Values are stored as f32; in-memory values of a decoded trace are therefore
// always exactly representable in f32 and file round-trips are byte-exact.
struct EpisodeTrace {
  std::uint32_t dim = 0;
  TokenMatrix instruction;
  std::vector<TokenMatrix> frames;
  std::optional<std::vector<TracePose>> poses;
  std::optional<std::vector<std::uint8_t>> actions;
  std::string metadata_json;

  friend bool operator==(const EpisodeTrace&, const EpisodeTrace&) = default;
};

namespace detail {

inline constexpr std::array<char, 8> kTraceMagic = {'S', 'A', 'M', 'E',
                                                    'M', 'T', 'R', '1'};

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back((v >> (8 * i)) & 0xFF);
  }

  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    u32(bits);
  }

  void bytes(const char* data, std::size_t n) {
    buf_.insert(buf_.end(), data, data + n);
  }

  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size)
      : data_(data), size_(size) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return size_ - pos_; }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return data_[pos_++];
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  float f32(const char* what) {
    std::uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string out(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return out;
  }

  // Up-front bound for a block that is about to be decoded; keeps corrupted
  // count fields from driving allocations past the buffer.
  void require(std::uint64_t n, const char* what) const { need(n, what); }

 private:
  void need(std::uint64_t n, const char* what) const {
    if (size_ - pos_ < n) {
      throw TraceParseError(std::string("truncated trace: expected ") + what,
                            pos_);
    }
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

inline void write_matrix_f32(ByteWriter& w, const TokenMatrix& m) {
  for (std::size_t t = 0; t < m.size(); ++t) {
    for (double v : m.token(t)) w.f32(static_cast<float>(v));
  }
}

inline TokenMatrix read_matrix_f32(ByteReader& r, std::size_t count,
                                   std::size_t dim, const char* what) {
  TokenMatrix m(dim);
  TokenVector tok(dim);
  for (std::size_t t = 0; t < count; ++t) {
    for (std::size_t d = 0; d < dim; ++d) {
      const std::size_t at = r.offset();
      const float v = r.f32(what);
      if (!std::isfinite(v)) {
        throw TraceParseError(std::string("non-finite value in ") + what, at);
      }
      tok[d] = static_cast<double>(v);
    }
    m.push_token(tok);
  }
  return m;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_trace(const EpisodeTrace& trace) {
  if (trace.dim == 0) throw ConfigError("trace dim must be >= 1");
  if (trace.instruction.empty()) {
    throw ConfigError("trace instruction must be non-empty");
  }
  if (trace.poses && trace.poses->size() != trace.frames.size()) {
    throw ConfigError("trace poses must be 1:1 with frames");
  }
  if (trace.actions && trace.actions->size() != trace.frames.size()) {
    throw ConfigError("trace actions must be 1:1 with frames");
  }

  detail::ByteWriter w;
  w.bytes(detail::kTraceMagic.data(), detail::kTraceMagic.size());
  w.u32(kTraceFormatVersion);
  w.u32(trace.dim);
  w.u32(static_cast<std::uint32_t>(trace.frames.size()));
  w.u32(static_cast<std::uint32_t>(trace.instruction.size()));
  std::uint8_t flags = 0;
  if (trace.poses) flags |= 0x01;
  if (trace.actions) flags |= 0x02;
  w.u8(flags);
  detail::write_matrix_f32(w, trace.instruction);
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    const TokenMatrix& f = trace.frames[i];
    if (f.dim() != trace.dim) {
      throw ConfigError("trace frame dimension does not match trace dim");
    }
    w.u32(static_cast<std::uint32_t>(f.size()));
    detail::write_matrix_f32(w, f);
    if (trace.poses) {
      const TracePose& p = (*trace.poses)[i];
      w.f32(static_cast<float>(p.x));
      w.f32(static_cast<float>(p.y));
      w.f32(static_cast<float>(p.heading));
    }
    if (trace.actions) w.u8((*trace.actions)[i]);
  }
  w.u32(static_cast<std::uint32_t>(trace.metadata_json.size()));
  w.bytes(trace.metadata_json.data(), trace.metadata_json.size());
  return w.take();
}

inline EpisodeTrace parse_trace(const std::uint8_t* data, std::size_t size) {
  detail::ByteReader r(data, size);
  const std::string magic = r.bytes(detail::kTraceMagic.size(), "magic");
  if (!std::equal(magic.begin(), magic.end(), detail::kTraceMagic.begin())) {
    throw TraceParseError("not a trace file", 0);
  }
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kTraceFormatVersion) {
    throw TraceParseError("unsupported trace version " +
                              std::to_string(version),
                          version_at);
  }
  EpisodeTrace trace;
  const std::size_t dim_at = r.offset();
  trace.dim = r.u32("dim");
  if (trace.dim == 0) throw TraceParseError("dim must be >= 1", dim_at);
  const std::uint32_t n_frames = r.u32("frame count");
  const std::size_t n_inst_at = r.offset();
  const std::uint32_t n_inst = r.u32("instruction token count");
  if (n_inst == 0) {
    throw TraceParseError("instruction token count must be >= 1", n_inst_at);
  }
  const std::uint8_t flags = r.u8("flags");
  if (flags & ~0x03) {
    throw TraceParseError("unknown trace flags", r.offset() - 1);
  }
  r.require(std::uint64_t{4} * n_inst * trace.dim, "instruction tokens");
  trace.instruction =
      detail::read_matrix_f32(r, n_inst, trace.dim, "instruction tokens");
  if (flags & 0x01) trace.poses.emplace();
  if (flags & 0x02) trace.actions.emplace();
  r.require(std::uint64_t{4} * n_frames, "frame headers");
  trace.frames.reserve(n_frames);
  for (std::uint32_t i = 0; i < n_frames; ++i) {
    const std::size_t count_at = r.offset();
    const std::uint32_t count = r.u32("frame token count");
    if (count == 0) {
      throw TraceParseError("frame token count must be >= 1", count_at);
    }
    r.require(std::uint64_t{4} * count * trace.dim, "frame tokens");
    trace.frames.push_back(
        detail::read_matrix_f32(r, count, trace.dim, "frame tokens"));
    if (trace.poses) {
      TracePose p;
      p.x = r.f32("pose x");
      p.y = r.f32("pose y");
      p.heading = r.f32("pose heading");
      trace.poses->push_back(p);
    }
    if (trace.actions) trace.actions->push_back(r.u8("action label"));
  }
  const std::uint32_t meta_len = r.u32("metadata length");
  const std::size_t meta_at = r.offset();
  trace.metadata_json = r.bytes(meta_len, "metadata");
  if (meta_len > 0 &&
      !nlohmann::json::accept(trace.metadata_json, /*ignore_comments=*/false)) {
    throw TraceParseError("metadata is not valid JSON", meta_at);
  }
  if (r.remaining() != 0) {
    throw TraceParseError("trailing bytes after trace", r.offset());
  }
  return trace;
}

inline EpisodeTrace parse_trace(const std::vector<std::uint8_t>& buf) {
  return parse_trace(buf.data(), buf.size());
}

inline void write_trace(const EpisodeTrace& trace,
                        const std::filesystem::path& path) {
  const auto buf = serialize_trace(trace);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("write failed: " + path.string());
}

inline EpisodeTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open trace file: " + path.string());
  std::vector<std::uint8_t> buf(
      (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_trace(buf);
}

namespace detail {

inline double f32_round(double v) {
  return static_cast<double>(static_cast<float>(v));
}

inline TokenVector draw_vector(SplitMix64& rng, std::size_t dim) {
  TokenVector v(dim);
  for (double& x : v) x = rng.next_symmetric();
  return v;
}

}  // namespace detail

// Deterministic synthetic episode. Frames follow a coordinate-clamped random
// walk with step scale `drift`; the first round(fraction * tokens_per_frame)
// token slots of every frame are planted near the instruction direction so
// relevance-driven policies have signal to find. Per-slot jitters are drawn
// once and reused across frames, so drift = 0 makes all frames identical.
// Every stored value is rounded through f32 to keep file round-trips exact.
//
// Draw order from SplitMix64(seed), frozen for reproducibility:
//   instruction direction (dim), instruction jitters (tokens x dim),
//   walk origin (dim), base jitters (tokens x dim),
//   planted jitters (tokens x dim), walk deltas ((n_frames - 1) x dim).
inline EpisodeTrace generate_synthetic(std::uint64_t seed, std::size_t n_frames,
                                       std::size_t tokens_per_frame,
                                       std::size_t dim, double drift,
                                       double planted_relevant_fraction) {
  if (n_frames == 0 || tokens_per_frame == 0 || dim == 0) {
    throw ConfigError("generate_synthetic: all counts must be >= 1");
  }
  if (!(drift >= 0.0 && drift <= 1.0)) {
    throw ConfigError("generate_synthetic: drift must be in [0, 1]");
  }
  if (!(planted_relevant_fraction >= 0.0 && planted_relevant_fraction <= 1.0)) {
    throw ConfigError(
        "generate_synthetic: planted_relevant_fraction must be in [0, 1]");
  }

  SplitMix64 rng(seed);

  TokenVector instr_dir = detail::draw_vector(rng, dim);
  double norm = 0.0;
  for (double v : instr_dir) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    instr_dir[0] = 1.0;
  } else {
    for (double& v : instr_dir) v /= norm;
  }

  EpisodeTrace trace;
  trace.dim = static_cast<std::uint32_t>(dim);
  trace.instruction = TokenMatrix(dim);
  TokenVector tok(dim);
  for (std::size_t j = 0; j < tokens_per_frame; ++j) {
    for (std::size_t d = 0; d < dim; ++d) {
      tok[d] =
          detail::f32_round(instr_dir[d] + 0.05 * rng.next_symmetric());
    }
    trace.instruction.push_token(tok);
  }

  TokenVector base = detail::draw_vector(rng, dim);
  std::vector<TokenVector> base_jitter(tokens_per_frame);
  for (auto& j : base_jitter) j = detail::draw_vector(rng, dim);
  std::vector<TokenVector> planted_jitter(tokens_per_frame);
  for (auto& j : planted_jitter) j = detail::draw_vector(rng, dim);

  const std::size_t planted_count = std::min(
      tokens_per_frame,
      static_cast<std::size_t>(
          std::llround(planted_relevant_fraction *
                       static_cast<double>(tokens_per_frame))));

  trace.frames.reserve(n_frames);
  for (std::size_t t = 0; t < n_frames; ++t) {
    if (t > 0) {
      for (std::size_t d = 0; d < dim; ++d) {
        base[d] = std::clamp(base[d] + drift * rng.next_symmetric(), -1.0, 1.0);
      }
    }
    TokenMatrix frame(dim);
    for (std::size_t j = 0; j < tokens_per_frame; ++j) {
      const bool planted = j < planted_count;
      for (std::size_t d = 0; d < dim; ++d) {
        const double v = planted
                             ? instr_dir[d] + 0.1 * planted_jitter[j][d]
                             : base[d] + 0.25 * base_jitter[j][d];
        tok[d] = detail::f32_round(v);
      }
      frame.push_token(tok);
    }
    trace.frames.push_back(std::move(frame));
  }

  nlohmann::json meta;
  meta["generator"] = {
      {"seed", seed},
      {"n_frames", n_frames},
      {"tokens_per_frame", tokens_per_frame},
      {"dim", dim},
      {"drift", drift},
      {"planted_relevant_fraction", planted_relevant_fraction},
  };
  trace.metadata_json = meta.dump();
  return trace;
}

}  // namespace samem
