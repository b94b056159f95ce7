#pragma once

#include "pnl/types.h"

namespace pnl {

// Camera frame convention: x right, y up, z pointing behind the camera.
// Points in front of the camera have negative z.

/// Homogeneous 3D point (x, y, z, w). Not all components may be zero.
struct HomogeneousPoint3 {
    Vec4 coords;

    HomogeneousPoint3() : coords(0, 0, 0, 1) {}
    explicit HomogeneousPoint3(const Vec4 &c) : coords(c) {}
    HomogeneousPoint3(double x, double y, double z, double w = 1.0) : coords(x, y, z, w) {}

    static HomogeneousPoint3 from_euclidean(const Vec3 &p) { return HomogeneousPoint3(p.x(), p.y(), p.z(), 1.0); }

    Vec3 euclidean_part() const { return coords.head<3>(); }
    double w() const { return coords(3); }
};

/// Plücker coordinates (u, v) of a 3D line: u is the moment (normal of the
/// interpretation plane through the origin), v the direction. Homogeneous:
/// (u, v) and (s u, s v) denote the same line.
struct PluckerLine {
    Vec3 u = Vec3::Zero();
    Vec3 v = Vec3::Zero();

    PluckerLine() = default;
    PluckerLine(const Vec3 &moment, const Vec3 &direction) : u(moment), v(direction) {}

    static PluckerLine from_vector(const Vec6 &L) { return {L.head<3>(), L.tail<3>()}; }
    Vec6 vector() const {
        Vec6 L;
        L << u, v;
        return L;
    }

    /// |u.v| / (|u||v|), or 0 when either part vanishes.
    double constraint_residual() const;

    /// Point on the line closest to the origin, (v x u) / |v|^2.
    Vec3 closest_point_to_origin() const { return v.cross(u) / v.squaredNorm(); }
};

/// Homogeneous line (lx, ly, lw) on the normalized image plane.
struct ImageLine2D {
    Vec3 coeffs = Vec3::Zero();

    ImageLine2D() = default;
    explicit ImageLine2D(const Vec3 &l) : coeffs(l) {}
    ImageLine2D(double lx, double ly, double lw) : coeffs(lx, ly, lw) {}
};

struct EulerAngles {
    double alpha = 0.0; // about x
    double beta = 0.0;  // about y
    double gamma = 0.0; // about z
};

/// R = Rx(alpha) * Ry(beta) * Rz(gamma): rotations about z, then y, then x.
Mat3 rotation_from_euler(const EulerAngles &angles);

/// Camera orientation R and position t in the world frame. A world point X
/// maps into the camera frame as R (X - t).
struct CameraPose {
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();

    CameraPose() = default;
    CameraPose(const Mat3 &rotation, const Vec3 &position) : R(rotation), t(position) {}

    Vec3 to_camera(const Vec3 &world) const { return R * (world - t); }
    HomogeneousPoint3 to_camera(const HomogeneousPoint3 &world) const;

    /// True when R is orthonormal with det 1 within tol.
    bool is_valid(double tol = 1e-10) const;
};

/// 6x6 Plücker motion [[R, R[-t]x], [0, R]].
struct LineMotionMatrix {
    Mat6 T = Mat6::Identity();
};

/// 3x6 line projection [R | R[-t]x], the upper half of the motion matrix.
struct LineProjectionMatrix {
    Mat36 P = Mat36::Zero();

    LineProjectionMatrix() = default;
    explicit LineProjectionMatrix(const Mat36 &m) : P(m) {}

    Mat3 left() const { return P.leftCols<3>(); }
    Mat3 right() const { return P.rightCols<3>(); }
};

/// [x]_x, the matrix with skew(x) * y = x cross y.
Mat3 skew(const Vec3 &x);

/// Inverse of skew() after projecting S onto the skew-symmetric subspace.
Vec3 unskew(const Mat3 &S);

/// Line joining two distinct homogeneous points. Throws CoincidentPoints.
PluckerLine plucker_from_endpoints(const HomogeneousPoint3 &A, const HomogeneousPoint3 &B);
PluckerLine plucker_from_endpoints(const Vec3 &a, const Vec3 &b);

LineMotionMatrix line_motion_matrix(const CameraPose &pose);
LineProjectionMatrix line_projection_matrix(const CameraPose &pose);

PluckerLine transform_line(const LineMotionMatrix &T, const PluckerLine &L);

/// l ~ P L. Throws LineThroughCameraCenter if the interpretation plane is
/// undefined (|P L| < 1e-12 |L|).
ImageLine2D project_line(const LineProjectionMatrix &P, const PluckerLine &L);

/// Angle in [0, pi/2] between two homogeneous 3-vectors, ignoring sign.
double projective_angle(const Vec3 &a, const Vec3 &b);

} // namespace pnl
