#pragma once

#include <span>
#include <vector>

#include "pnl/geometry.h"

namespace pnl {

/// Similarity transform applied to image-line 3-vectors treated as
/// homogeneous 2D points (point-line duality).
struct Normalization2D {
    Mat3 N = Mat3::Identity();
    Mat3 N_inv = Mat3::Identity();
};

/// Translation of the world origin to c, acting on Plücker vectors (u first).
struct Normalization3D {
    Vec3 c = Vec3::Zero();

    /// [[I, -[c]x], [0, I]]
    Mat6 D() const;
    /// [[I, [c]x], [0, I]]
    Mat6 D_inv() const;
};

struct NormalizedLines2D {
    std::vector<ImageLine2D> lines;
    Normalization2D transform;
};

struct TranslatedLines3D {
    std::vector<PluckerLine> lines;
    Normalization3D transform;
};

// Lines whose unit-normed third coefficient falls below this are treated as
// dual points at infinity: transformed, but excluded from the statistics.
inline constexpr double kDualPointInfinityThreshold = 1e-8;

/// Centers the dual points at the origin with mean distance sqrt(2).
/// Throws DegenerateNormalization when the scale is undefined.
NormalizedLines2D normalize_2d_lines(std::span<const ImageLine2D> lines);

struct WeiszfeldResult {
    Vec3 point = Vec3::Zero();
    int iterations = 0;
    bool converged = false;
    /// Sum of point-to-line distances, one entry per iterate (starting point first).
    std::vector<double> objective;
};

/// Weiszfeld iteration for the point minimizing the sum of Euclidean
/// distances to the lines. Never throws on non-convergence; see `converged`.
WeiszfeldResult weiszfeld_closest_point(std::span<const PluckerLine> lines, double tol = 1e-9, int max_iter = 100);

/// Same as weiszfeld_closest_point() but throws ConvergenceFailed.
Vec3 closest_point_to_lines(std::span<const PluckerLine> lines, double tol = 1e-9, int max_iter = 100);

/// Sum of Euclidean distances from x to each line.
double sum_of_line_distances(std::span<const PluckerLine> lines, const Vec3 &x);

/// Re-expresses lines in the frame whose origin sits at c: u' = u - c x v.
TranslatedLines3D translate_lines(std::span<const PluckerLine> lines, const Vec3 &c);

/// P = N_inv * P_norm * D.
Mat36 denormalize_projection(const Mat36 &P_norm, const Normalization2D &n2d, const Normalization3D &n3d);

} // namespace pnl
