#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pnl/aor.h"
#include "pnl/errors.h"
#include "pnl/intrinsics.h"

namespace pnl {

// Synthetic Monte Carlo harness: random segments in a cube, a camera on a
// sphere looking at the cube center, Gaussian endpoint noise, optional
// gross outliers.

enum class Method { Plain, Aor };

std::string_view method_name(Method method);

struct BenchConfig {
    std::size_t n_lines = 25;
    double sigma_p = 0.0;          // px
    double outlier_fraction = 0.0; // in [0, 1)
    double outlier_sigma = 100.0;  // px, added on top of sigma_p
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    double cube_side = 10.0;       // m
    double camera_distance = 25.0; // m
    int image_width = 640;
    int image_height = 480;
    double focal = 800.0;          // px
    /// Rigid shift of the whole scene (segments and camera) away from the origin.
    Vec3 scene_offset = Vec3::Zero();

    Method method = Method::Plain;
    bool prenormalize = true; // plain method only
    AorConfig aor;
    /// 0 selects PNL_THREADS or the hardware concurrency.
    unsigned threads = 0;

    /// Throws InvalidArgument.
    void validate() const;
    /// Square pixels, zero skew, principal point at the image center.
    Intrinsics intrinsics() const;
};

struct Segment3D {
    Vec3 a;
    Vec3 b;
};

struct Segment2D {
    Vec2 a;
    Vec2 b;
};

struct Scene {
    std::vector<Segment3D> segments;
    CameraPose true_pose;
    Intrinsics intrinsics;
    /// Noise-free pixel endpoints of every segment.
    std::vector<Segment2D> image_segments;
    int camera_attempts = 0;
};

using Rng = std::mt19937_64;

/// Independent stream for one trial, so results do not depend on scheduling.
Rng trial_rng(std::uint64_t seed, std::uint64_t trial);

/// Throws SceneGenerationFailed when 100 camera draws all leave some
/// endpoint outside the image.
Scene generate_scene(const BenchConfig &config, Rng &rng);

/// True when every endpoint is in front of the camera and inside the image.
bool scene_in_view(std::span<const Segment3D> segments, const CameraPose &pose, const Intrinsics &K, int width,
                   int height);

std::vector<Segment2D> add_endpoint_noise(std::span<const Segment2D> endpoints, double sigma_p, Rng &rng);

struct OutlierInjection {
    std::vector<Segment2D> endpoints;
    std::vector<bool> outlier_mask; // true for the perturbed lines
};

/// Picks floor(fraction * n) lines uniformly and adds outlier_sigma noise to
/// both of their endpoints.
OutlierInjection apply_outliers(std::span<const Segment2D> endpoints, double fraction, double outlier_sigma, Rng &rng);

struct PoseError {
    double delta_theta = 0.0; // degrees
    double delta_tau = 0.0;   // meters
};

PoseError pose_errors(const CameraPose &estimated, const CameraPose &truth);

/// Rotation angle of R, in radians, computed without acos precision loss.
double rotation_angle(const Mat3 &R);

std::vector<Correspondence> build_correspondences(std::span<const Segment3D> segments,
                                                  std::span<const Segment2D> image_segments, const Intrinsics &K);

struct TrialRecord {
    std::size_t trial = 0;
    Method method = Method::Plain;
    std::size_t n = 0;
    double sigma_p = 0.0;
    double outlier_fraction = 0.0;
    PoseError error;
    double runtime_ms = 0.0;
    bool failed = false;
    std::optional<ErrorCode> failure;
    double conditioning = 0.0;
    std::size_t inliers = 0;
    int aor_iterations = 0;
    /// Fraction of injected outliers the estimator rejected; NaN without outliers.
    double outlier_recall = 0.0;
};

TrialRecord run_trial(const BenchConfig &config, std::size_t trial);

/// Runs config.trials independent trials, in parallel when allowed. Output
/// order and content depend only on the config (runtime aside).
std::vector<TrialRecord> run_monte_carlo(const BenchConfig &config);

unsigned resolve_thread_count(unsigned requested);

// Box-plot statistics: whiskers extend to the extreme values within 10 IQR of
// the quartiles; anything beyond counts as an outlier.
struct BoxStats {
    std::size_t count = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    std::size_t outliers = 0;
};

inline constexpr double kWhiskerIqrFactor = 10.0;

/// Linear-interpolation quantile of unsorted data, q in [0, 1].
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);
BoxStats box_stats(std::span<const double> values);

struct GroupSummary {
    Method method = Method::Plain;
    std::size_t n = 0;
    double sigma_p = 0.0;
    double outlier_fraction = 0.0;
    std::size_t trials = 0;
    std::size_t failures = 0;
    BoxStats delta_theta;
    BoxStats delta_tau;
    BoxStats runtime_ms;
};

/// Groups records by (method, n, sigma_p, outlier_fraction) in first-seen order.
std::vector<GroupSummary> summarize(std::span<const TrialRecord> records);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

/// Columns: trial,method,n,sigma_p,outlier_fraction,delta_theta_deg,delta_tau_m,runtime_ms,failed.
/// Without timing the runtime column is written as 0 so output is reproducible.
void write_trials_csv(std::ostream &out, std::span<const TrialRecord> records, bool include_header = true,
                      bool include_runtime = true);

std::string summary_json(std::span<const GroupSummary> groups);

} // namespace pnl
