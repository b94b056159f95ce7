#include "pnl/prenorm.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "pnl/errors.h"

namespace pnl {

namespace {

struct LineTerm {
    Mat3 Q;   // projector orthogonal to the direction
    Vec3 a;   // closest point to the origin
};

std::vector<LineTerm> make_terms(std::span<const PluckerLine> lines) {
    std::vector<LineTerm> terms;
    terms.reserve(lines.size());
    for (const PluckerLine &L : lines) {
        const double vn = L.v.norm();
        if (!(vn > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "line with zero direction vector");
        }
        const Vec3 vhat = L.v / vn;
        terms.push_back({Mat3::Identity() - vhat * vhat.transpose(), L.closest_point_to_origin()});
    }
    return terms;
}

Vec3 pseudo_solve(const Mat3 &A, const Vec3 &b) {
    Eigen::JacobiSVD<Mat3> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-12);
    return svd.solve(b);
}

double objective(const std::vector<LineTerm> &terms, const Vec3 &x) {
    double total = 0.0;
    for (const LineTerm &term : terms) {
        total += (term.Q * (x - term.a)).norm();
    }
    return total;
}

} // namespace

Mat6 Normalization3D::D() const {
    Mat6 D = Mat6::Identity();
    D.topRightCorner<3, 3>() = -skew(c);
    return D;
}

Mat6 Normalization3D::D_inv() const {
    Mat6 D = Mat6::Identity();
    D.topRightCorner<3, 3>() = skew(c);
    return D;
}

NormalizedLines2D normalize_2d_lines(std::span<const ImageLine2D> lines) {
    if (lines.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "need at least two image lines to normalize");
    }

    std::vector<Vec3> unit;
    unit.reserve(lines.size());
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    std::size_t finite = 0;
    for (const ImageLine2D &line : lines) {
        const double n = line.coeffs.norm();
        if (!(n > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "zero image line");
        }
        unit.push_back(line.coeffs / n);
        const Vec3 &l = unit.back();
        if (std::abs(l(2)) >= kDualPointInfinityThreshold) {
            centroid += l.head<2>() / l(2);
            ++finite;
        }
    }
    if (finite == 0) {
        throw Error(ErrorCode::DegenerateNormalization, "all dual points lie at infinity");
    }
    centroid /= static_cast<double>(finite);

    double mean_distance = 0.0;
    for (const Vec3 &l : unit) {
        if (std::abs(l(2)) >= kDualPointInfinityThreshold) {
            mean_distance += (l.head<2>() / l(2) - centroid).norm();
        }
    }
    mean_distance /= static_cast<double>(finite);
    if (!(mean_distance > 1e-12)) {
        throw Error(ErrorCode::DegenerateNormalization, "dual points coincide");
    }

    const double s = std::sqrt(2.0) / mean_distance;
    NormalizedLines2D out;
    out.transform.N << s, 0.0, -s * centroid.x(),
                       0.0, s, -s * centroid.y(),
                       0.0, 0.0, 1.0;
    out.transform.N_inv << 1.0 / s, 0.0, centroid.x(),
                           0.0, 1.0 / s, centroid.y(),
                           0.0, 0.0, 1.0;
    out.lines.reserve(unit.size());
    for (const Vec3 &l : unit) {
        out.lines.emplace_back(out.transform.N * l);
    }
    return out;
}

double sum_of_line_distances(std::span<const PluckerLine> lines, const Vec3 &x) {
    return objective(make_terms(lines), x);
}

WeiszfeldResult weiszfeld_closest_point(std::span<const PluckerLine> lines, double tol, int max_iter) {
    if (lines.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "need at least two 3D lines");
    }
    const std::vector<LineTerm> terms = make_terms(lines);

    // Start from the least-squares point (all distances weighted equally).
    Mat3 A = Mat3::Zero();
    Vec3 b = Vec3::Zero();
    for (const LineTerm &term : terms) {
        A += term.Q;
        b += term.Q * term.a;
    }

    WeiszfeldResult result;
    result.point = pseudo_solve(A, b);
    result.objective.push_back(objective(terms, result.point));

    // Distances are floored so that a term whose line passes through the
    // iterate keeps the system well conditioned; the iterate then slides
    // along that line instead of stalling on it.
    const double floor = 1e-10 * std::max(result.objective.front() / static_cast<double>(terms.size()),
                                          std::numeric_limits<double>::min());

    for (int iter = 0; iter < max_iter; ++iter) {
        A.setZero();
        b.setZero();
        for (const LineTerm &term : terms) {
            const double d = std::max((term.Q * (result.point - term.a)).norm(), floor);
            A += term.Q / d;
            b += term.Q * (term.a - result.point) / d;
        }
        result.iterations = iter + 1;

        // Solved for the displacement, which stays accurate as it shrinks.
        const Vec3 delta = pseudo_solve(A, b);
        const double step = delta.norm();
        result.point += delta;
        result.objective.push_back(objective(terms, result.point));
        if (step < tol) {
            result.converged = true;
            return result;
        }
    }
    return result;
}

Vec3 closest_point_to_lines(std::span<const PluckerLine> lines, double tol, int max_iter) {
    WeiszfeldResult result = weiszfeld_closest_point(lines, tol, max_iter);
    if (!result.converged) {
        throw Error(ErrorCode::ConvergenceFailed,
                    "Weiszfeld iteration did not converge in " + std::to_string(max_iter) + " iterations");
    }
    return result.point;
}

TranslatedLines3D translate_lines(std::span<const PluckerLine> lines, const Vec3 &c) {
    TranslatedLines3D out;
    out.transform.c = c;
    out.lines.reserve(lines.size());
    for (const PluckerLine &L : lines) {
        out.lines.emplace_back(L.u - c.cross(L.v), L.v);
    }
    return out;
}

Mat36 denormalize_projection(const Mat36 &P_norm, const Normalization2D &n2d, const Normalization3D &n3d) {
    return n2d.N_inv * P_norm * n3d.D();
}

} // namespace pnl
