#include "pnl/aor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pnl/errors.h"

namespace pnl {

void AorConfig::validate() const {
    auto in_range = [](double q) { return q > 0.0 && q <= 1.0; };
    if (!std::all_of(quantile_schedule.begin(), quantile_schedule.end(), in_range) || !in_range(tail_quantile)) {
        throw Error(ErrorCode::InvalidArgument, "AOR quantiles must lie in (0, 1]");
    }
    if (min_inliers < kMinLines) {
        throw Error(ErrorCode::InvalidArgument, "AOR min_inliers must be at least 9");
    }
    if (max_iterations < 1) {
        throw Error(ErrorCode::InvalidArgument, "AOR max_iterations must be positive");
    }
    if (!(convergence_delta >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "AOR convergence_delta must be non-negative");
    }
}

double AorConfig::quantile_at(int iteration) const {
    const auto idx = static_cast<std::size_t>(std::max(iteration, 1) - 1);
    return idx < quantile_schedule.size() ? quantile_schedule[idx] : tail_quantile;
}

double quantile_threshold(std::span<const double> residuals, int iteration, const AorConfig &config) {
    if (residuals.empty()) {
        throw Error(ErrorCode::InvalidArgument, "quantile of an empty residual set");
    }
    const double j = config.quantile_at(iteration);
    const auto n = residuals.size();
    // The small offset keeps e.g. 0.3 * 10 from rounding up to rank 4.
    auto rank = static_cast<std::size_t>(std::ceil(j * static_cast<double>(n) - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, n);

    std::vector<double> sorted(residuals.begin(), residuals.end());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
    return sorted[rank - 1];
}

AorResult estimate_pose_aor(std::span<const Correspondence> correspondences, const AorConfig &config,
                            const AorObserver &observer) {
    config.validate();
    const std::size_t n = correspondences.size();
    if (n < config.min_inliers) {
        throw Error(ErrorCode::TooFewInliers, "only " + std::to_string(n) + " correspondences supplied");
    }

    std::vector<Correspondence> weighted(correspondences.begin(), correspondences.end());
    std::vector<int> weights(n, 1);
    for (Correspondence &c : weighted) {
        c.weight = 1;
    }
    // Every correspondence keeps its rows; only the selection changes.
    const MeasurementSystem full = build_measurement_matrix(weighted);

    AorResult result;
    std::vector<int> best_weights;
    double previous_score = std::numeric_limits<double>::infinity();
    bool stopped = false;

    for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
        std::vector<std::size_t> active;
        for (std::size_t i = 0; i < n; ++i) {
            if (weights[i] == 1) {
                active.push_back(i);
            }
        }
        if (active.size() < config.min_inliers) {
            throw Error(ErrorCode::TooFewInliers, "active set shrank to " + std::to_string(active.size()) +
                                                      " correspondences at iteration " + std::to_string(iteration));
        }

        MeasurementMatrix M(2 * static_cast<Eigen::Index>(active.size()), 18);
        for (std::size_t k = 0; k < active.size(); ++k) {
            M.middleRows<2>(2 * static_cast<Eigen::Index>(k)) =
                full.all_rows.middleRows<2>(2 * static_cast<Eigen::Index>(active[k]));
        }
        const HomogeneousSolution solution = solve_homogeneous_lsq(M);
        const std::vector<double> residuals = correspondence_residuals(full, solution.p);

        double score = 0.0;
        for (std::size_t i : active) {
            score += residuals[i] * residuals[i];
        }
        score /= static_cast<double>(active.size());

        AorIteration entry;
        entry.iteration = iteration;
        entry.active = active.size();
        entry.score = score;
        result.iterations = iteration;
        if (observer) {
            observer({iteration, weights, residuals, M.rows(), score, false});
        }

        if (iteration > 1 && !(previous_score - score > config.convergence_delta * previous_score)) {
            result.log.push_back(entry);
            stopped = true;
            break;
        }
        previous_score = score;
        best_weights = weights;

        entry.threshold = quantile_threshold(residuals, iteration, config);
        result.log.push_back(entry);
        for (std::size_t i = 0; i < n; ++i) {
            weights[i] = residuals[i] > entry.threshold ? 0 : 1;
        }
    }
    if (!stopped) {
        throw Error(ErrorCode::ConvergenceFailed,
                    "AOR error score still decreasing after " + std::to_string(config.max_iterations) + " iterations");
    }

    // Final solve on the best weighting, now with prenormalization.
    result.inlier_mask.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        weighted[i].weight = best_weights[i];
        result.inlier_mask[i] = best_weights[i] == 1;
    }
    result.final_error = previous_score;

    const PoseEstimate estimate = estimate_pose(weighted, true);
    if (observer) {
        observer({result.iterations, best_weights, {}, 2 * static_cast<Eigen::Index>(estimate.diagnostics.active_lines),
                  previous_score, estimate.diagnostics.prenormalized});
    }
    result.pose = estimate.pose;
    result.extraction = estimate.extraction;
    result.diagnostics = estimate.diagnostics;

    AorIteration final_entry;
    final_entry.iteration = result.iterations;
    final_entry.active = estimate.diagnostics.active_lines;
    final_entry.score = previous_score;
    final_entry.prenormalized = estimate.diagnostics.prenormalized;
    result.log.push_back(final_entry);
    return result;
}

} // namespace pnl
