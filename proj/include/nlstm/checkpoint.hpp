#pragma once

#include <iosfwd>
#include <string>

#include "nlstm/model.hpp"

namespace nlstm {

// Versioned binary checkpoint, endianness-fixed (everything little-endian):
//   magic "NLSTMCK1" (8 bytes)
//   u32 version (=1)
//   config: u32 architecture (0 lstm, 1 stacked, 2 nlstm), u32 layers,
//           u32 nesting_depth, u32 cell_size, u32 input_size, u32 output_size,
//           u64 seed
//   u32 tensor count, then per tensor in the model's visit order:
//     u32 name length, name bytes, u32 rows, u32 cols, rows*cols f64 values.
// Round-trips are bit-exact.

void save_checkpoint(const Model& m, std::ostream& out);
void save_checkpoint(const Model& m, const std::string& path);

Model load_checkpoint(std::istream& in);
Model load_checkpoint(const std::string& path);

}  // namespace nlstm
