#pragma once

#include "salsaloc/labels.hpp"
#include "salsaloc/metrics.hpp"

#include <string>

namespace salsaloc::cli {

/// Azimuth and elevation against frame for one class: truth as black dots,
/// raw estimates red, fused estimates blue. Either estimate set may be null.
std::string class_svg(int class_id, const TrajectorySet& truth, const TrajectorySet* raw,
                      const TrajectorySet* fused);

/// Classwise MAE bars (raw red, fused blue). Classes without a localized
/// source are marked NOT_DETECTED.
std::string mae_svg(const EvalReport& raw, const EvalReport* fused, int class_count, double threshold_deg);

}  // namespace salsaloc::cli
