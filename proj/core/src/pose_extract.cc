#include "pnl/pose_extract.h"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "pnl/errors.h"

namespace pnl {

namespace {

const Mat3 &z_matrix() {
    static const Mat3 Z = (Mat3() << 0, 1, 0, -1, 0, 0, 0, 0, 0).finished();
    return Z;
}

const Mat3 &w_matrix() {
    static const Mat3 W = (Mat3() << 0, -1, 0, 1, 0, 0, 0, 0, 1).finished();
    return W;
}

int count_in_front(const Mat3 &R, const Vec3 &t, std::span<const PluckerLine> lines) {
    int count = 0;
    for (const PluckerLine &L : lines) {
        const Vec3 a = L.closest_point_to_origin();
        if ((R * (a - t)).z() < 0.0) {
            ++count;
        }
    }
    return count;
}

} // namespace

double recover_scale(const Mat36 &P) {
    const double det = P.leftCols<3>().determinant();
    if (!(std::abs(det) >= 1e-14)) {
        throw Error(ErrorCode::SingularRotationBlock, "left 3x3 block of the projection estimate is singular");
    }
    return 1.0 / std::cbrt(det);
}

DecompositionResult decompose_essential_like(const Mat3 &scaled_right) {
    Eigen::JacobiSVD<Mat3> svd(scaled_right, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat3 &U = svd.matrixU();
    const Mat3 &V = svd.matrixV();

    DecompositionResult result;
    result.singular_values = svd.singularValues();
    result.sigma = 0.5 * (result.singular_values(0) + result.singular_values(1));

    // det(U W V^T) = det(U) det(V) for both W and W^T; flip the third
    // column when it is -1.
    const double sign = (U.determinant() * V.determinant()) < 0.0 ? -1.0 : 1.0;
    const Mat3 D = Eigen::Vector3d(1.0, 1.0, sign).asDiagonal();

    result.candidate_a.R = U * w_matrix() * D * V.transpose();
    result.candidate_b.R = U * w_matrix().transpose() * D * V.transpose();

    result.degenerate_translation = result.sigma <= 1e-14 * std::max(1.0, scaled_right.norm());
    if (result.degenerate_translation) {
        result.candidate_a.S.setZero();
        result.candidate_b.S.setZero();
        return result;
    }

    const Mat3 Sa = result.sigma * V * z_matrix() * V.transpose();
    result.candidate_a.S = 0.5 * (Sa - Sa.transpose());
    result.candidate_b.S = -result.candidate_a.S;
    return result;
}

PoseChoice disambiguate(const DecompositionResult &result, std::span<const PluckerLine> lines) {
    if (lines.empty()) {
        throw Error(ErrorCode::EmptyLineSet, "no lines to test the pose candidates against");
    }
    PoseChoice choice;
    const EssentialCandidate &a = result.candidate_a;
    const EssentialCandidate &b = result.candidate_b;
    choice.in_front_a = count_in_front(a.R, a.position(), lines);
    choice.in_front_b = count_in_front(b.R, b.position(), lines);
    if (choice.in_front_a == choice.in_front_b) {
        throw Error(ErrorCode::AmbiguousPose, "both pose candidates see " + std::to_string(choice.in_front_a) +
                                                  " of " + std::to_string(lines.size()) + " lines in front");
    }
    if (choice.in_front_a > choice.in_front_b) {
        choice.chosen = Candidate::A;
        choice.pose = CameraPose(a.R, a.position());
    } else {
        choice.chosen = Candidate::B;
        choice.pose = CameraPose(b.R, b.position());
    }
    return choice;
}

PoseExtraction extract_pose(const Mat36 &P, std::span<const PluckerLine> lines) {
    PoseExtraction out;
    out.scale = recover_scale(P);
    out.decomposition = decompose_essential_like(out.scale * P.rightCols<3>());
    if (out.decomposition.degenerate_translation) {
        throw Error(ErrorCode::DegenerateTranslation, "camera position coincides with the world origin");
    }
    const PoseChoice choice = disambiguate(out.decomposition, lines);
    out.pose = choice.pose;
    out.chosen = choice.chosen;
    return out;
}

EulerAngles euler_from_rotation(const Mat3 &R) {
    // R = Rx(a) Ry(b) Rz(g):
    //   R(0,2) = sin b, R(0,0) = cos b cos g, R(0,1) = -cos b sin g,
    //   R(1,2) = -sin a cos b, R(2,2) = cos a cos b.
    EulerAngles e;
    const double cb = std::hypot(R(0, 0), R(0, 1));
    e.beta = std::atan2(R(0, 2), cb);
    if (cb > 1e-12) {
        e.alpha = std::atan2(-R(1, 2), R(2, 2));
        e.gamma = std::atan2(-R(0, 1), R(0, 0));
    } else {
        // Gimbal lock: only alpha +/- gamma is observable.
        const double sb = R(0, 2) >= 0.0 ? 1.0 : -1.0;
        e.alpha = std::atan2(sb * R(1, 0), R(1, 1));
        e.gamma = 0.0;
    }
    return e;
}

} // namespace pnl
