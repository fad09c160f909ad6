#pragma once

#include "discgrade/common.hpp"

namespace discgrade {

// Renders the report bundle from a run directory: loss/LR curves, the
// balanced-accuracy trajectory, per-class recall trajectories with EMA
// overlays, the confusion heatmap, and localization overlays. Consumes
// whatever stages exist under run_dir; throws ValidationError when none do.

/// Smoothing factor for the recall-trajectory EMA overlays.
inline constexpr double kRecallEmaFactor = 0.8;

void emit_report(const fs::path& run_dir, const fs::path& out_dir);

}  // namespace discgrade
