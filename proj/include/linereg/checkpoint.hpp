#pragma once

#include <string>

#include "linereg/micronet.hpp"

namespace linereg {

// Versioned binary model checkpoint. Layout (all integers little-endian):
//   bytes 0-7   magic "LREGNET1"
//   5 x int32   k, stride, channels, descriptor_dim, scale_invariant (0/1)
//   9 blocks in fixed order (edge1..3, seg1..3, desc1..3), each:
//     uint64 weight count, float32[count] weights (row-major cin x cout),
//     uint64 bias count,   float32[count] biases
// Written atomically (temp file + rename). Throws std::runtime_error on I/O
// failure, bad magic, or a shape mismatch against the stored config.
void save_checkpoint(const MicroNet<float>& net, const std::string& path);
MicroNet<float> load_checkpoint(const std::string& path);

}  // namespace linereg
