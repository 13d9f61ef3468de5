// SPDX-License-Identifier: Apache-2.0
#include "vidledger/chunk.hpp"

#include <algorithm>

#include "vidledger/sha256.hpp"

namespace vidledger::chunk {

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::BadMagic: return "bad-magic";
    case ParseErrorKind::Truncated: return "truncated";
    case ParseErrorKind::ZeroField: return "zero-field";
    case ParseErrorKind::EmptyPayload: return "empty-payload";
    case ParseErrorKind::TrailingBytes: return "trailing-bytes";
  }
  return "unknown";
}

Bytes encode_chunk(const VideoChunk& chunk) {
  Bytes out;
  out.reserve(kHeaderBytes + chunk.payload.size());
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_u32be(out, chunk.width_px);
  put_u32be(out, chunk.height_px);
  put_u32be(out, chunk.frame_rate_milli);
  put_u64be(out, chunk.position_ms);
  put_u64be(out, chunk.payload.size());
  out.insert(out.end(), chunk.payload.begin(), chunk.payload.end());
  return out;
}

VideoChunk parse_chunk(ByteView frame) {
  if (frame.size() < kMagic.size())
    throw ChunkParseError(ParseErrorKind::Truncated, "frame shorter than magic");
  if (!std::equal(kMagic.begin(), kMagic.end(), frame.begin()))
    throw ChunkParseError(ParseErrorKind::BadMagic, "expected SVC1");
  if (frame.size() < kHeaderBytes)
    throw ChunkParseError(ParseErrorKind::Truncated,
                          "header needs " + std::to_string(kHeaderBytes) + " bytes, have " + std::to_string(frame.size()));

  const std::uint8_t* p = frame.data() + kMagic.size();
  VideoChunk chunk;
  chunk.width_px = get_u32be(p);
  chunk.height_px = get_u32be(p + 4);
  chunk.frame_rate_milli = get_u32be(p + 8);
  chunk.position_ms = get_u64be(p + 12);
  const std::uint64_t payload_len = get_u64be(p + 20);

  if (chunk.width_px == 0) throw ChunkParseError(ParseErrorKind::ZeroField, "width is 0");
  if (chunk.height_px == 0) throw ChunkParseError(ParseErrorKind::ZeroField, "height is 0");
  if (chunk.frame_rate_milli == 0) throw ChunkParseError(ParseErrorKind::ZeroField, "frame rate is 0");
  if (payload_len == 0) throw ChunkParseError(ParseErrorKind::EmptyPayload, "payload_len is 0");

  const std::uint64_t remaining = frame.size() - kHeaderBytes;
  if (payload_len > remaining)
    throw ChunkParseError(ParseErrorKind::Truncated, "declared payload " + std::to_string(payload_len) +
                                                         " bytes, " + std::to_string(remaining) + " remain");
  if (payload_len < remaining)
    throw ChunkParseError(ParseErrorKind::TrailingBytes,
                          std::to_string(remaining - payload_len) + " bytes after payload");

  chunk.payload.assign(frame.begin() + kHeaderBytes, frame.end());
  return chunk;
}

VideoMetadata extract_metadata(const VideoChunk& chunk) {
  return VideoMetadata{chunk.width_px, chunk.height_px, chunk.frame_rate_milli, chunk.position_ms,
                       sha256(chunk.payload)};
}

std::string metadata_preimage(const VideoMetadata& vm) {
  std::string s;
  s.reserve(96);
  s += std::to_string(vm.width_px);
  s += '|';
  s += std::to_string(vm.height_px);
  s += '|';
  s += std::to_string(vm.frame_rate_milli);
  s += '|';
  s += std::to_string(vm.position_ms);
  s += '|';
  s += to_hex(vm.chunk_hash);
  return s;
}

Digest hash_metadata(const VideoMetadata& vm) { return sha256(as_bytes(metadata_preimage(vm))); }

SyntheticCamera::SyntheticCamera(std::uint64_t seed, std::size_t payload_bytes, ChunkingConfig chunking,
                                 std::uint32_t width_px, std::uint32_t height_px, std::uint32_t frame_rate_milli)
    : rng_(seed),
      payload_bytes_(payload_bytes),
      chunking_(chunking),
      width_px_(width_px),
      height_px_(height_px),
      frame_rate_milli_(frame_rate_milli) {
  chunking_.validate();
  if (payload_bytes_ == 0) throw std::invalid_argument("payload_bytes must be > 0");
}

VideoChunk SyntheticCamera::next_chunk() {
  VideoChunk c;
  c.width_px = width_px_;
  c.height_px = height_px_;
  c.frame_rate_milli = frame_rate_milli_;
  c.position_ms = produced_ * chunking_.interval_ms;
  c.payload.resize(payload_bytes_);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < payload_bytes_; ++i) {
    if (i % 8 == 0) word = rng_();
    c.payload[i] = static_cast<std::uint8_t>(word >> (8 * (i % 8)));
  }
  ++produced_;
  return c;
}

}  // namespace vidledger::chunk
