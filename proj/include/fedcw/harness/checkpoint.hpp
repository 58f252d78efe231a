#pragma once

#include <string>

#include "fedcw/ddpg.hpp"

namespace fedcw::harness {

/// Binary weight checkpoint, explicit little-endian layout:
///   magic "FCW1" | u64 layout_id | u64 actor_len | u64 critic_len | doubles.
/// Readable on any host regardless of native byte order.
void write_checkpoint(const std::string& path, const rl::WeightSnapshot& snap);
rl::WeightSnapshot read_checkpoint(const std::string& path);

}  // namespace fedcw::harness
