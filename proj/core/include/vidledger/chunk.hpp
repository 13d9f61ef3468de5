// SPDX-License-Identifier: Apache-2.0
#pragma once

// Video chunk container and metadata hashing.
//
// Container layout (all integers big-endian):
//
//   "SVC1" | width u32 | height u32 | frame_rate_milli u32 | position_ms u64
//          | payload_len u64 | payload bytes
//
// The metadata hash is SHA-256 over the ASCII preimage
//   "<width>|<height>|<frame_rate_milli>|<position_ms>|<hex(sha256(payload))>"
// with decimal integers, lowercase hex, no whitespace and no trailing '|'.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "vidledger/bytes.hpp"

namespace vidledger::chunk {

inline constexpr std::array<std::uint8_t, 4> kMagic{'S', 'V', 'C', '1'};
inline constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 + 8 + 8;

struct VideoChunk {
  std::uint32_t width_px = 0;
  std::uint32_t height_px = 0;
  /// Frames per second times 1000, e.g. 29.97 fps -> 29970.
  std::uint32_t frame_rate_milli = 0;
  /// Stream position of the chunk start.
  std::uint64_t position_ms = 0;
  Bytes payload;

  bool operator==(const VideoChunk&) const = default;
};

struct VideoMetadata {
  std::uint32_t width_px = 0;
  std::uint32_t height_px = 0;
  std::uint32_t frame_rate_milli = 0;
  std::uint64_t position_ms = 0;
  /// SHA-256 of the payload bytes only.
  Digest chunk_hash{};

  bool operator==(const VideoMetadata&) const = default;
};

struct ChunkingConfig {
  /// Interval between metadata extractions, i.e. the chunk duration.
  std::uint64_t interval_ms = 10'000;

  void validate() const {
    if (interval_ms == 0) throw std::invalid_argument("interval_ms must be > 0");
  }
};

enum class ParseErrorKind { BadMagic, Truncated, ZeroField, EmptyPayload, TrailingBytes };

std::string_view to_string(ParseErrorKind kind);

class ChunkParseError : public std::runtime_error {
 public:
  ChunkParseError(ParseErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}
  ParseErrorKind kind() const noexcept { return kind_; }

 private:
  ParseErrorKind kind_;
};

Bytes encode_chunk(const VideoChunk& chunk);
/// Strict decode; throws ChunkParseError.
VideoChunk parse_chunk(ByteView frame);

VideoMetadata extract_metadata(const VideoChunk& chunk);
std::string metadata_preimage(const VideoMetadata& vm);
Digest hash_metadata(const VideoMetadata& vm);

/// Deterministic stream of synthetic chunks: fixed geometry, positions
/// advancing by the chunking interval, payload bytes from a seeded PRNG.
class SyntheticCamera {
 public:
  SyntheticCamera(std::uint64_t seed, std::size_t payload_bytes, ChunkingConfig chunking = {},
                  std::uint32_t width_px = 1920, std::uint32_t height_px = 1080,
                  std::uint32_t frame_rate_milli = 30'000);

  VideoChunk next_chunk();
  Bytes next_frame() { return encode_chunk(next_chunk()); }
  std::uint64_t produced() const { return produced_; }

 private:
  std::mt19937_64 rng_;
  std::size_t payload_bytes_;
  ChunkingConfig chunking_;
  std::uint32_t width_px_;
  std::uint32_t height_px_;
  std::uint32_t frame_rate_milli_;
  std::uint64_t produced_ = 0;
};

}  // namespace vidledger::chunk
