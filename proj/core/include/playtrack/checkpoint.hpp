#pragma once

#include <string>

#include "playtrack/motion_model.hpp"

namespace playtrack {

inline constexpr int kCheckpointVersion = 1;

/// Writes hyperparameters and every named tensor as JSON (format documented in
/// docs/formats.md). Doubles are written with round-trip precision.
void save_checkpoint(const std::string& path, const ModelParams& params);

/// Throws std::runtime_error on unreadable files, version mismatch or shape mismatch.
ModelParams load_checkpoint(const std::string& path);

std::string checkpoint_to_string(const ModelParams& params);
ModelParams checkpoint_from_string(const std::string& text);

}  // namespace playtrack
