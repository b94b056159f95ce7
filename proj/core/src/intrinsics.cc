#include "pnl/intrinsics.h"

#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "pnl/errors.h"

namespace pnl {

namespace {

const Mat3 &flip_z() {
    static const Mat3 F = Eigen::Vector3d(1.0, 1.0, -1.0).asDiagonal();
    return F;
}

} // namespace

void Intrinsics::validate() const {
    const bool finite = std::isfinite(fx) && std::isfinite(fy) && std::isfinite(cx) && std::isfinite(cy) &&
                        std::isfinite(skew);
    if (!finite || !(fx > 0.0) || !(fy > 0.0)) {
        throw Error(ErrorCode::SingularIntrinsics, "focal lengths must be positive and finite");
    }
}

Mat3 Intrinsics::camera_matrix() const {
    Mat3 K;
    K << fx, skew, cx,
         0.0, fy, cy,
         0.0, 0.0, 1.0;
    return K;
}

Mat3 Intrinsics::ray_from_pixel() const {
    validate();
    return flip_z() * camera_matrix().inverse();
}

Vec3 Intrinsics::pixel_to_ray(const Vec2 &pixel) const {
    return ray_from_pixel() * pixel.homogeneous();
}

Vec2 Intrinsics::project(const Vec3 &camera_point) const {
    const Vec3 p = camera_matrix() * (flip_z() * camera_point);
    return p.hnormalized();
}

ImageLine2D apply_intrinsics(const Vec3 &pixel_line, const Intrinsics &K) {
    K.validate();
    // Lines transform with the inverse transpose of the point map, and
    // (F K^-1)^-T = F K^T.
    return ImageLine2D(flip_z() * K.camera_matrix().transpose() * pixel_line);
}

ImageLine2D line2d_from_endpoints(const Vec2 &e1, const Vec2 &e2, const Intrinsics &K) {
    const Vec3 r1 = K.pixel_to_ray(e1);
    const Vec3 r2 = K.pixel_to_ray(e2);
    const Vec3 l = r1.cross(r2);
    if (e1 == e2 || !(l.norm() > 1e-15 * r1.norm() * r2.norm())) {
        throw Error(ErrorCode::CoincidentEndpoints, "image segment endpoints coincide");
    }
    return ImageLine2D(l);
}

} // namespace pnl
