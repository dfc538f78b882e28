#pragma once

#include <optional>

#include "playtrack/appearance.hpp"
#include "playtrack/geometry.hpp"

namespace playtrack {

/// One detector output for one frame.
struct Detection {
    BoundingBox box;
    double score = 1.0;
    std::optional<AppearanceEmbedding> embedding;
};

}  // namespace playtrack
