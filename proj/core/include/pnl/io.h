#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pnl/aor.h"
#include "pnl/dlt.h"
#include "pnl/intrinsics.h"

namespace pnl {

// Line-set CSV files carry a mandatory header row that selects the record form:
//
//   3D lines:  id,ax,ay,az,bx,by,bz      two world points (meters)
//              id,ux,uy,uz,vx,vy,vz      raw Plücker (moment, direction)
//   2D lines:  id,x1,y1,x2,y2            two pixel endpoints
//              id,a,b,c                  pixel-space line a x + b y + c = 0
//              id,lx,ly,lw               normalized image plane line
//
// Blank lines and lines starting with '#' are skipped.

struct LineRecord3D {
    std::string id;
    PluckerLine line;
};

struct LineRecord2D {
    std::string id;
    ImageLine2D line;
};

struct CorrespondenceSet {
    std::vector<std::string> ids;
    std::vector<Correspondence> correspondences;
};

// Measured Plücker input is accepted up to this relative bilinear residual.
inline constexpr double kPluckerInputTolerance = 1e-6;

std::vector<LineRecord3D> read_lines3d(std::istream &in, std::string_view source = "<stream>");
std::vector<LineRecord3D> read_lines3d_file(const std::filesystem::path &path);

/// Pixel forms are mapped through K; without intrinsics the pixel forms are
/// read as already-normalized coordinates.
std::vector<LineRecord2D> read_lines2d(std::istream &in, const std::optional<Intrinsics> &K,
                                       std::string_view source = "<stream>");
std::vector<LineRecord2D> read_lines2d_file(const std::filesystem::path &path, const std::optional<Intrinsics> &K);

/// Pairs 2D records with 3D records by id, in 2D file order. Throws JoinError.
CorrespondenceSet join_correspondences(std::span<const LineRecord3D> lines3d, std::span<const LineRecord2D> lines2d);

CorrespondenceSet parse_correspondences(const std::filesystem::path &path3d, const std::filesystem::path &path2d,
                                        const std::optional<Intrinsics> &K = std::nullopt);

void write_lines3d_plucker(std::ostream &out, std::span<const LineRecord3D> records);
void write_lines2d_normalized(std::ostream &out, std::span<const LineRecord2D> records);
/// Maps normalized lines back to pixel space (id,a,b,c).
void write_lines2d_pixel(std::ostream &out, std::span<const LineRecord2D> records, const Intrinsics &K);

// JSON: {"fx": .., "fy": .., "cx": .., "cy": .., "skew": ..}; skew optional.
Intrinsics intrinsics_from_json(std::string_view text);
Intrinsics read_intrinsics_file(const std::filesystem::path &path);

struct PoseReport {
    CameraPose pose;
    double scale = 1.0;
    Candidate candidate = Candidate::A;
    double conditioning = 0.0;
    std::size_t inliers = 0;
    std::size_t total = 0;
    bool aor = false;
    int aor_iterations = 0;
    bool prenormalized = true;
};

PoseReport make_pose_report(const PoseEstimate &estimate, std::size_t total);
PoseReport make_pose_report(const AorResult &result);

/// Pose JSON with R (row-major), t, Euler angles in degrees, scale, chosen
/// candidate and diagnostics.
std::string pose_to_json(const PoseReport &report);
/// Reads R and t back; throws ParseError or InvalidArgument.
CameraPose pose_from_json(std::string_view text);
CameraPose read_pose_file(const std::filesystem::path &path);

} // namespace pnl
