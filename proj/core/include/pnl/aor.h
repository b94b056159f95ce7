#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pnl/estimator.h"

namespace pnl {

struct AorConfig {
    /// Quantile used at iterations 1, 2, ...; tail_quantile afterwards.
    std::vector<double> quantile_schedule{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3};
    double tail_quantile = 0.25;
    int max_iterations = 50;
    std::size_t min_inliers = 9;
    /// The loop stops once the error score decreases by less than this
    /// fraction of its previous value.
    double convergence_delta = 1e-12;

    /// Throws InvalidArgument when a field is out of range.
    void validate() const;
    double quantile_at(int iteration) const;
};

struct AorIteration {
    int iteration = 0;
    std::size_t active = 0;
    double score = 0.0;     // mean squared residual over the active set
    double threshold = 0.0; // quantile cut applied after this solve
    bool prenormalized = false;
};

struct AorResult {
    CameraPose pose;
    std::vector<bool> inlier_mask;
    int iterations = 0;
    double final_error = 0.0;
    PoseExtraction extraction;
    EstimateDiagnostics diagnostics; // of the final prenormalized solve
    /// One entry per reweighting iteration, followed by the final solve.
    std::vector<AorIteration> log;
};

/// State handed to an observer after every solve: once per reweighting
/// iteration, then once for the final solve (residuals empty there).
struct AorSnapshot {
    int iteration = 0;
    std::span<const int> weights;
    std::span<const double> residuals;
    Eigen::Index measurement_rows = 0;
    double score = 0.0;
    bool prenormalized = false;
};

using AorObserver = std::function<void(const AorSnapshot &)>;

/// Nearest-rank quantile: element ceil(j n) (1-based) of the sorted residuals,
/// with j taken from the schedule for this iteration (1-based).
double quantile_threshold(std::span<const double> residuals, int iteration, const AorConfig &config);

/// Algebraic outlier rejection: reweighted unnormalized solves with a
/// shrinking quantile cut until the error score stops decreasing, then one
/// prenormalized solve on the surviving inliers. Input weights are ignored.
AorResult estimate_pose_aor(std::span<const Correspondence> correspondences, const AorConfig &config = {},
                            const AorObserver &observer = {});

} // namespace pnl
