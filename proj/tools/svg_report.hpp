#pragma once

#include <string>

#include "playtrack/metrics.hpp"
#include "playtrack/mot_io.hpp"

namespace playtrack::tools {

/// Center paths of every identity: ground truth as thin grey lines, tracks colored by id.
void write_trajectory_svg(const std::string& path, const LabeledFrames& gt,
                          const LabeledFrames& results, double image_width, double image_height);

/// Bar chart of HOTA, DetA, AssA, MOTA and IDF1 in percent.
void write_metric_bars_svg(const std::string& path, const EvalReport& report);

}  // namespace playtrack::tools
