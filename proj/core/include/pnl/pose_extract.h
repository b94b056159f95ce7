#pragma once

#include <span>

#include "pnl/geometry.h"

namespace pnl {

/// One factorization R * S of the scaled right block, S skew-symmetric.
/// S estimates [-t]x, so the candidate camera position is -unskew(S).
struct EssentialCandidate {
    Mat3 R = Mat3::Identity();
    Mat3 S = Mat3::Zero();

    Vec3 position() const { return -unskew(S); }
};

struct DecompositionResult {
    EssentialCandidate candidate_a;
    EssentialCandidate candidate_b;
    double sigma = 0.0;              // mean of the two largest singular values
    Vec3 singular_values = Vec3::Zero();
    bool degenerate_translation = false;
};

enum class Candidate { A, B };

struct PoseChoice {
    CameraPose pose;
    Candidate chosen = Candidate::A;
    int in_front_a = 0;
    int in_front_b = 0;
};

struct PoseExtraction {
    CameraPose pose;
    DecompositionResult decomposition;
    double scale = 1.0;
    Candidate chosen = Candidate::A;
};

/// s = 1 / cbrt(det P1), so that det(s P1) = 1. Throws SingularRotationBlock.
double recover_scale(const Mat36 &P);

/// Essential-matrix style factorization of s*P2 into two (R, S) candidates,
/// both with det R = +1. Sets degenerate_translation (and zero S) when the
/// translation vanishes.
DecompositionResult decompose_essential_like(const Mat3 &scaled_right);

/// Picks the candidate that places strictly more line points (closest point
/// to the world origin) in front of the camera. Throws AmbiguousPose on a
/// tie and EmptyLineSet for no lines.
PoseChoice disambiguate(const DecompositionResult &result, std::span<const PluckerLine> lines);

/// recover_scale -> decompose_essential_like -> disambiguate. Throws
/// DegenerateTranslation when the translation is zero.
PoseExtraction extract_pose(const Mat36 &P, std::span<const PluckerLine> lines);

/// Inverse of rotation_from_euler(), beta in [-pi/2, pi/2]. At gimbal lock
/// gamma is set to 0.
EulerAngles euler_from_rotation(const Mat3 &R);

} // namespace pnl
