#pragma once

#include <string>

#include "triad/nn.hpp"

namespace triad {

/// Checkpoint file: a JSON document carrying the model config and every
/// parameter tensor (shape + row-major values + modality attribution).
/// Stable across versions; saving the same model twice is byte-identical.
void save_checkpoint(const Model& model, const std::string& path);

Model load_checkpoint(const std::string& path);

} // namespace triad
