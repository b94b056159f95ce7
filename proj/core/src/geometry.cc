#include "pnl/geometry.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "pnl/errors.h"

namespace pnl {

double PluckerLine::constraint_residual() const {
    const double scale = u.norm() * v.norm();
    if (scale == 0.0) {
        return 0.0;
    }
    return std::abs(u.dot(v)) / scale;
}

Mat3 rotation_from_euler(const EulerAngles &angles) {
    const Eigen::AngleAxisd rx(angles.alpha, Vec3::UnitX());
    const Eigen::AngleAxisd ry(angles.beta, Vec3::UnitY());
    const Eigen::AngleAxisd rz(angles.gamma, Vec3::UnitZ());
    return (rx * ry * rz).toRotationMatrix();
}

HomogeneousPoint3 CameraPose::to_camera(const HomogeneousPoint3 &world) const {
    Eigen::Matrix4d E = Eigen::Matrix4d::Identity();
    E.topLeftCorner<3, 3>() = R;
    E.topRightCorner<3, 1>() = -R * t;
    return HomogeneousPoint3(E * world.coords);
}

bool CameraPose::is_valid(double tol) const {
    if (!R.allFinite() || !t.allFinite()) {
        return false;
    }
    const double ortho = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

Mat3 skew(const Vec3 &x) {
    Mat3 S;
    S << 0.0, -x(2), x(1),
         x(2), 0.0, -x(0),
         -x(1), x(0), 0.0;
    return S;
}

Vec3 unskew(const Mat3 &S) {
    const Mat3 A = 0.5 * (S - S.transpose());
    return Vec3(A(2, 1), A(0, 2), A(1, 0));
}

PluckerLine plucker_from_endpoints(const HomogeneousPoint3 &A, const HomogeneousPoint3 &B) {
    const Vec3 a = A.euclidean_part();
    const Vec3 b = B.euclidean_part();
    PluckerLine L(a.cross(b), A.w() * b - B.w() * a);

    const double scale = A.coords.norm() * B.coords.norm();
    if (scale == 0.0 || (L.u.norm() <= 1e-12 * scale && L.v.norm() <= 1e-12 * scale)) {
        throw Error(ErrorCode::CoincidentPoints, "endpoints coincide up to scale");
    }
    return L;
}

PluckerLine plucker_from_endpoints(const Vec3 &a, const Vec3 &b) {
    return plucker_from_endpoints(HomogeneousPoint3::from_euclidean(a), HomogeneousPoint3::from_euclidean(b));
}

LineMotionMatrix line_motion_matrix(const CameraPose &pose) {
    LineMotionMatrix M;
    M.T.setZero();
    M.T.topLeftCorner<3, 3>() = pose.R;
    M.T.topRightCorner<3, 3>() = pose.R * skew(-pose.t);
    M.T.bottomRightCorner<3, 3>() = pose.R;
    return M;
}

LineProjectionMatrix line_projection_matrix(const CameraPose &pose) {
    Mat36 P;
    P << pose.R, pose.R * skew(-pose.t);
    return LineProjectionMatrix(P);
}

PluckerLine transform_line(const LineMotionMatrix &T, const PluckerLine &L) {
    return PluckerLine::from_vector(T.T * L.vector());
}

ImageLine2D project_line(const LineProjectionMatrix &P, const PluckerLine &L) {
    const Vec6 Lv = L.vector();
    const Vec3 l = P.P * Lv;
    if (l.norm() < 1e-12 * Lv.norm()) {
        throw Error(ErrorCode::LineThroughCameraCenter, "line passes through the projection center");
    }
    return ImageLine2D(l);
}

double projective_angle(const Vec3 &a, const Vec3 &b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        return M_PI / 2;
    }
    // atan2 keeps full precision for nearly parallel vectors.
    const double s = a.cross(b).norm();
    const double c = std::abs(a.dot(b));
    return std::atan2(s, c);
}

} // namespace pnl
