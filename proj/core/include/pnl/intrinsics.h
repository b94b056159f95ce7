#pragma once

#include "pnl/geometry.h"

namespace pnl {

/// Pinhole intrinsics in pixels. Pixels map to camera-frame rays with z = -1
/// (the camera looks down its negative z axis).
struct Intrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    double skew = 0.0;

    /// Throws SingularIntrinsics unless fx, fy > 0 and all fields are finite.
    void validate() const;

    Mat3 camera_matrix() const;
    /// Maps homogeneous pixels (px, py, 1) to rays ((px - cx)/fx, (py - cy)/fy, -1) (no skew).
    Mat3 ray_from_pixel() const;

    Vec3 pixel_to_ray(const Vec2 &pixel) const;
    /// Projects a camera-frame point; only meaningful for points with z < 0.
    Vec2 project(const Vec3 &camera_point) const;
};

/// Maps a pixel-space line onto the normalized image plane so that pixel
/// points on it map to rays on the result. Throws SingularIntrinsics.
ImageLine2D apply_intrinsics(const Vec3 &pixel_line, const Intrinsics &K);

/// Normalized-plane line through two pixel endpoints: cross product of their
/// rays. Throws CoincidentEndpoints.
ImageLine2D line2d_from_endpoints(const Vec2 &e1, const Vec2 &e2, const Intrinsics &K);

} // namespace pnl
