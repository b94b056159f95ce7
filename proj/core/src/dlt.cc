#include "pnl/dlt.h"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

#include "pnl/errors.h"
#include "pnl/prenorm.h"

namespace pnl {

Eigen::Matrix<double, 2, 18> correspondence_rows(const PluckerLine &L, const ImageLine2D &line) {
    const double norm = line.coeffs.norm();
    if (!(norm > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "zero image line");
    }
    const Vec3 l = line.coeffs / norm;
    const Eigen::Matrix<double, 1, 6> Lt = L.vector().transpose();

    // Rows of [l]x applied to the three P-rows.
    Eigen::Matrix<double, 3, 18> rows = Eigen::Matrix<double, 3, 18>::Zero();
    rows.block<1, 6>(0, 6) = -l(2) * Lt;
    rows.block<1, 6>(0, 12) = l(1) * Lt;
    rows.block<1, 6>(1, 0) = l(2) * Lt;
    rows.block<1, 6>(1, 12) = -l(0) * Lt;
    rows.block<1, 6>(2, 0) = -l(1) * Lt;
    rows.block<1, 6>(2, 6) = l(0) * Lt;

    // Drop the smallest-norm row; on ties the later one goes.
    int drop = 2;
    double smallest = rows.row(2).squaredNorm();
    for (int r = 1; r >= 0; --r) {
        const double n = rows.row(r).squaredNorm();
        if (n < smallest) {
            smallest = n;
            drop = r;
        }
    }

    Eigen::Matrix<double, 2, 18> kept;
    int k = 0;
    for (int r = 0; r < 3; ++r) {
        if (r != drop) {
            kept.row(k++) = rows.row(r);
        }
    }
    return kept;
}

MeasurementSystem build_measurement_matrix(std::span<const Correspondence> correspondences) {
    MeasurementSystem system;
    const auto n = static_cast<Eigen::Index>(correspondences.size());
    system.all_rows.resize(2 * n, 18);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Correspondence &c = correspondences[static_cast<std::size_t>(i)];
        if (c.weight != 0 && c.weight != 1) {
            throw Error(ErrorCode::InvalidArgument, "correspondence weight must be 0 or 1");
        }
        system.all_rows.middleRows<2>(2 * i) = correspondence_rows(c.line3d, c.line2d);
        if (c.weight == 1) {
            system.active.push_back(static_cast<std::size_t>(i));
        }
    }
    if (system.active.size() < kMinLines) {
        throw Error(ErrorCode::InsufficientLines, "need at least " + std::to_string(kMinLines) +
                                                      " active line correspondences, got " +
                                                      std::to_string(system.active.size()));
    }

    system.M.resize(2 * static_cast<Eigen::Index>(system.active.size()), 18);
    for (std::size_t k = 0; k < system.active.size(); ++k) {
        const auto src = static_cast<Eigen::Index>(system.active[k]);
        system.M.middleRows<2>(2 * static_cast<Eigen::Index>(k)) = system.all_rows.middleRows<2>(2 * src);
    }
    return system;
}

HomogeneousSolution solve_homogeneous_lsq(const MeasurementMatrix &M) {
    if (M.rows() < 18) {
        throw Error(ErrorCode::InsufficientLines, "measurement matrix needs at least 18 rows");
    }
    // Column-pivoting QR preconditioning keeps this linear in the row count.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    const Eigen::VectorXd &sv = svd.singularValues();

    HomogeneousSolution sol;
    sol.singular_values = sv;
    if (sv(16) < 1e-10 * sv(0)) {
        throw Error(ErrorCode::RankDeficient, "measurement matrix nullspace is not one-dimensional");
    }
    sol.p = svd.matrixV().col(17);
    sol.p.normalize();
    sol.residuals = M * sol.p;
    sol.conditioning = sv(17) > 0.0 ? sv(16) / sv(17) : std::numeric_limits<double>::infinity();
    return sol;
}

std::vector<double> correspondence_residuals(const MeasurementSystem &system, const Vec18 &p) {
    const Eigen::VectorXd r = system.all_rows * p;
    std::vector<double> out(static_cast<std::size_t>(r.size() / 2));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(2 * i);
        out[i] = std::hypot(r(k), r(k + 1));
    }
    return out;
}

Mat36 unstack_projection(const Vec18 &p) {
    Mat36 P;
    for (int r = 0; r < 3; ++r) {
        P.row(r) = p.segment<6>(6 * r).transpose();
    }
    return P;
}

Vec18 stack_projection(const Mat36 &P) {
    Vec18 p;
    for (int r = 0; r < 3; ++r) {
        p.segment<6>(6 * r) = P.row(r).transpose();
    }
    return p;
}

ProjectionEstimate estimate_projection_matrix(std::span<const Correspondence> correspondences, bool prenormalize) {
    ProjectionEstimate estimate;
    EstimateDiagnostics &diag = estimate.diagnostics;
    diag.prenormalized = prenormalize;

    std::vector<Correspondence> active;
    active.reserve(correspondences.size());
    for (const Correspondence &c : correspondences) {
        if (c.weight == 1) {
            active.push_back(c);
        } else if (c.weight != 0) {
            throw Error(ErrorCode::InvalidArgument, "correspondence weight must be 0 or 1");
        }
    }
    diag.active_lines = active.size();
    if (active.size() < kMinLines) {
        throw Error(ErrorCode::InsufficientLines, "need at least " + std::to_string(kMinLines) +
                                                      " active line correspondences, got " +
                                                      std::to_string(active.size()));
    }

    if (!prenormalize) {
        const MeasurementSystem system = build_measurement_matrix(active);
        const HomogeneousSolution sol = solve_homogeneous_lsq(system.M);
        diag.conditioning = sol.conditioning;
        estimate.P = unstack_projection(sol.p);
        estimate.P_centered = estimate.P;
        return estimate;
    }

    std::vector<ImageLine2D> lines2d;
    std::vector<PluckerLine> lines3d;
    lines2d.reserve(active.size());
    lines3d.reserve(active.size());
    for (const Correspondence &c : active) {
        lines2d.push_back(c.line2d);
        lines3d.push_back(c.line3d);
    }

    const NormalizedLines2D n2d = normalize_2d_lines(lines2d);
    // A Weiszfeld point short of full convergence still conditions the
    // system; the exact solution is unaffected by where the origin sits.
    const WeiszfeldResult closest = weiszfeld_closest_point(lines3d);
    diag.weiszfeld_iterations = closest.iterations;
    diag.weiszfeld_converged = closest.converged;
    diag.closest_point = closest.point;
    const TranslatedLines3D n3d = translate_lines(lines3d, closest.point);

    for (std::size_t i = 0; i < active.size(); ++i) {
        active[i].line2d = n2d.lines[i];
        active[i].line3d = n3d.lines[i];
    }
    const MeasurementSystem system = build_measurement_matrix(active);
    const HomogeneousSolution sol = solve_homogeneous_lsq(system.M);
    diag.conditioning = sol.conditioning;

    const Mat36 P_norm = unstack_projection(sol.p);
    estimate.P = denormalize_projection(P_norm, n2d.transform, n3d.transform);
    estimate.P /= estimate.P.norm();
    estimate.P_centered = denormalize_projection(P_norm, n2d.transform, Normalization3D{});
    estimate.P_centered /= estimate.P_centered.norm();
    estimate.frame_origin = closest.point;
    return estimate;
}

} // namespace pnl
