#pragma once

#include <filesystem>

#include "tfn/nn/model.hpp"

namespace tfn::nn {

/// Binary layout (little-endian):
///   "TFN1"
///   str mode, str backbone, str family   (str = u32 length + bytes)
///   u32 n_classes, u32 tfconv_channels, u32 input_length
///   u32 block count, then per block: str name, u32 ndims, u64 dims[ndims],
///   f64 data[prod(dims)]
/// Blocks cover every trainable parameter followed by every buffer.
void save_checkpoint(Model& model, const std::filesystem::path& path);

/// Rebuilds the architecture from the header and restores all blocks.
/// Throws ParseError on a malformed file or a block that does not fit.
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace tfn::nn
