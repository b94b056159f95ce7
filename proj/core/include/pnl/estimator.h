#pragma once

#include <span>

#include "pnl/dlt.h"
#include "pnl/pose_extract.h"

namespace pnl {

/// extraction.decomposition and scale refer to the line-centered frame used
/// for extraction; extraction.pose is in the world frame.
struct PoseEstimate {
    CameraPose pose;
    PoseExtraction extraction;
    EstimateDiagnostics diagnostics;
};

/// Full pipeline on the weight-1 correspondences: linear estimate of the
/// line projection matrix followed by constrained pose extraction.
PoseEstimate estimate_pose(std::span<const Correspondence> correspondences, bool prenormalize = true);

} // namespace pnl
