#pragma once

#include "scoregan/common.hpp"
#include "scoregan/param.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>

namespace scoregan {

/// On-disk model archive. Layout, all integers little-endian:
///   magic "SGAN" | format version u32 | tensor count u32 |
///   per tensor: name length u32, name bytes, rank u32, dims u32 each,
///               row-major float32 data |
///   config length u32, canonical JSON bytes | CRC32 u32 over everything
///   before it.
/// Tensors are stored in name order. Saving quantizes the in-memory values to
/// float32 so a resumed run and the continuing run share bit-identical state.
struct Checkpoint {
  std::map<std::string, Matrix> tensors;
  nlohmann::json meta;  // config snapshot, iteration counter, vocab, RNG seeds
};

constexpr std::uint32_t kCheckpointVersion = 1;

/// Writes the archive and rounds `tensors` (the live values) through float32.
void save_checkpoint(std::map<std::string, Matrix*> tensors, const nlohmann::json& meta,
                     const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

/// Collects a ParamSet's tensors under a name prefix ("gen/", "df/", ...).
void collect_params(std::map<std::string, Matrix*>& out, ParamSet& params,
                    const std::string& prefix);

/// Restores a ParamSet's tensors from a loaded checkpoint; throws
/// CheckpointError when a tensor is missing or shaped differently.
void restore_params(const Checkpoint& ckpt, ParamSet& params, const std::string& prefix);

std::uint32_t crc32(const unsigned char* data, std::size_t n, std::uint32_t seed = 0);

}  // namespace scoregan
