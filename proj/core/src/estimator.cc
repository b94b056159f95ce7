#include "pnl/estimator.h"

#include <vector>

#include "pnl/prenorm.h"

namespace pnl {

PoseEstimate estimate_pose(std::span<const Correspondence> correspondences, bool prenormalize) {
    PoseEstimate out;
    const ProjectionEstimate projection = estimate_projection_matrix(correspondences, prenormalize);
    out.diagnostics = projection.diagnostics;

    std::vector<PluckerLine> lines;
    lines.reserve(correspondences.size());
    for (const Correspondence &c : correspondences) {
        if (c.weight == 1) {
            lines.push_back(c.line3d);
        }
    }
    // Extraction is not translation-equivariant, so it runs in the frame
    // centered on the lines and the position is shifted back afterwards.
    const TranslatedLines3D centered = translate_lines(lines, projection.frame_origin);
    out.extraction = extract_pose(projection.P_centered, centered.lines);
    out.extraction.pose.t += projection.frame_origin;
    out.pose = out.extraction.pose;
    return out;
}

} // namespace pnl
