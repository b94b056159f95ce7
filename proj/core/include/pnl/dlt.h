#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pnl/geometry.h"

namespace pnl {

inline constexpr std::size_t kMinLines = 9;

/// A world-frame 3D line and its image on the normalized image plane.
/// weight is 0 or 1; weight-0 correspondences contribute no rows.
struct Correspondence {
    PluckerLine line3d;
    ImageLine2D line2d;
    int weight = 1;
};

using MeasurementMatrix = Eigen::Matrix<double, Eigen::Dynamic, 18>;

/// Homogeneous system M p = 0 with p the row-major stacking of the 3x6
/// line projection matrix.
struct MeasurementSystem {
    /// Rows of the weight-1 correspondences only, two per correspondence.
    MeasurementMatrix M;
    /// Two rows for every correspondence, regardless of weight.
    MeasurementMatrix all_rows;
    /// Index of the correspondence owning rows (2k, 2k+1) of M.
    std::vector<std::size_t> active;
};

/// The two largest-norm rows of [l]x P L = 0 for one correspondence, with l
/// unit-normed first. Rows keep their original order.
Eigen::Matrix<double, 2, 18> correspondence_rows(const PluckerLine &L, const ImageLine2D &l);

/// Throws InsufficientLines with fewer than 9 weight-1 correspondences.
MeasurementSystem build_measurement_matrix(std::span<const Correspondence> correspondences);

struct HomogeneousSolution {
    Vec18 p = Vec18::Zero();           // unit norm
    Eigen::VectorXd residuals;         // M p
    double conditioning = 0.0;         // sigma_17 / sigma_18
    Vec18 singular_values = Vec18::Zero();
};

/// Right singular vector of the smallest singular value. Throws
/// RankDeficient if sigma_17 < 1e-10 sigma_1.
HomogeneousSolution solve_homogeneous_lsq(const MeasurementMatrix &M);

/// sqrt(r_2i^2 + r_2i+1^2) for every correspondence, including weight-0 ones.
std::vector<double> correspondence_residuals(const MeasurementSystem &system, const Vec18 &p);

Mat36 unstack_projection(const Vec18 &p);
Vec18 stack_projection(const Mat36 &P);

struct EstimateDiagnostics {
    double conditioning = 0.0;
    std::size_t active_lines = 0;
    bool prenormalized = false;
    int weiszfeld_iterations = 0;
    bool weiszfeld_converged = false;
    Vec3 closest_point = Vec3::Zero();
};

struct ProjectionEstimate {
    Mat36 P = Mat36::Zero(); // world frame, unit Frobenius norm, arbitrary sign
    /// The same estimate expressed for lines re-centered at frame_origin
    /// (P = P_centered * D); equal to P when not prenormalized.
    Mat36 P_centered = Mat36::Zero();
    Vec3 frame_origin = Vec3::Zero();
    EstimateDiagnostics diagnostics;
};

/// Linear estimate of the line projection matrix from weight-1
/// correspondences, optionally with data prenormalization.
ProjectionEstimate estimate_projection_matrix(std::span<const Correspondence> correspondences,
                                              bool prenormalize = true);

} // namespace pnl
