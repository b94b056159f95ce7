#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "pnl/bench.h"
#include "pnl/dlt.h"
#include "pnl/errors.h"
#include "pnl/prenorm.h"
#include "test_support.h"

namespace pnl {
namespace {

using testing::Rng;

TEST(MeasurementMatrix, NineLinesGiveSquareSystem) {
    Rng rng(21);
    const auto s = testing::synthetic_scene(rng, 9);
    const MeasurementSystem sys = build_measurement_matrix(s.correspondences);
    EXPECT_EQ(sys.M.rows(), 18);
    EXPECT_EQ(sys.M.cols(), 18);
    EXPECT_EQ(sys.all_rows.rows(), 18);
}

TEST(MeasurementMatrix, TrueProjectionIsInNullspace) {
    Rng rng(22);
    for (int i = 0; i < 100; ++i) {
        const auto s = testing::synthetic_scene(rng, 9 + i);
        const MeasurementSystem sys = build_measurement_matrix(s.correspondences);
        const Vec18 p = stack_projection(line_projection_matrix(s.pose).P);
        ASSERT_LT((sys.M * p).norm(), 1e-10 * sys.M.norm() * p.norm());
    }
}

TEST(MeasurementMatrix, CameraAxisLineKeepsFirstTwoRows) {
    const PluckerLine L(Vec3(1, 2, 3), Vec3(-3, 0, 1));
    const Eigen::Matrix<double, 2, 18> rows = correspondence_rows(L, ImageLine2D(0, 0, 1));
    const Eigen::Matrix<double, 1, 6> Lt = L.vector().transpose();
    Eigen::Matrix<double, 2, 18> expected = Eigen::Matrix<double, 2, 18>::Zero();
    expected.block<1, 6>(0, 6) = -Lt;
    expected.block<1, 6>(1, 0) = Lt;
    EXPECT_EQ(rows, expected);
}

TEST(MeasurementMatrix, RowsUseUnitNormedLine) {
    const PluckerLine L(Vec3(1, 2, 3), Vec3(-3, 0, 1));
    EXPECT_LT((correspondence_rows(L, ImageLine2D(0, 0, 7)) - correspondence_rows(L, ImageLine2D(0, 0, 1))).norm(),
              1e-15);
}

TEST(MeasurementMatrix, KeptRowsAreTheLargest) {
    Rng rng(23);
    for (int i = 0; i < 1000; ++i) {
        const PluckerLine L(testing::random_vec3(rng), testing::random_vec3(rng));
        const Vec3 l = testing::random_vec3(rng);
        const Vec3 lu = l.normalized();
        // Full [l]x P L rows, computed independently via Kronecker structure.
        Eigen::Matrix<double, 3, 18> all;
        const Mat3 S = skew(lu);
        for (int r = 0; r < 3; ++r) {
            for (int k = 0; k < 3; ++k) {
                all.block<1, 6>(r, 6 * k) = S(r, k) * L.vector().transpose();
            }
        }
        std::array<double, 3> norms{all.row(0).norm(), all.row(1).norm(), all.row(2).norm()};
        const auto kept = correspondence_rows(L, ImageLine2D(l));
        const double dropped = *std::min_element(norms.begin(), norms.end());
        ASSERT_GE(std::min(kept.row(0).norm(), kept.row(1).norm()), dropped - 1e-15);
        for (int r = 0; r < 2; ++r) {
            bool found = false;
            for (int q = 0; q < 3; ++q) {
                found = found || (kept.row(r) - all.row(q)).norm() < 1e-15;
            }
            ASSERT_TRUE(found);
        }
    }
}

TEST(MeasurementMatrix, RowCountFollowsWeights) {
    Rng rng(24);
    auto s = testing::synthetic_scene(rng, 20);
    for (std::size_t i = 0; i < 20; i += 3) {
        s.correspondences[i].weight = 0;
    }
    const MeasurementSystem sys = build_measurement_matrix(s.correspondences);
    EXPECT_EQ(sys.M.rows(), 2 * 13);
    EXPECT_EQ(sys.all_rows.rows(), 40);
    EXPECT_EQ(sys.active.size(), 13U);
}

TEST(MeasurementMatrix, InvalidWeightRejected) {
    Rng rng(25);
    auto s = testing::synthetic_scene(rng, 10);
    s.correspondences[3].weight = 2;
    EXPECT_THROW(build_measurement_matrix(s.correspondences), Error);
}

TEST(MeasurementMatrix, EightLinesInsufficient) {
    Rng rng(26);
    const auto s = testing::synthetic_scene(rng, 8);
    try {
        build_measurement_matrix(s.correspondences);
        FAIL() << "expected InsufficientLines";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientLines);
    }
    try {
        estimate_projection_matrix(s.correspondences);
        FAIL() << "expected InsufficientLines";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientLines);
    }
}

TEST(SolveHomogeneous, ExactOneDimensionalNullspace) {
    Rng rng(27);
    const Vec18 n = Vec18::Random().normalized();
    MeasurementMatrix M = MeasurementMatrix::Random(40, 18);
    M -= (M * n) * n.transpose();
    const HomogeneousSolution sol = solve_homogeneous_lsq(M);
    EXPECT_NEAR(sol.p.norm(), 1.0, 1e-15);
    EXPECT_LT((M * sol.p).norm(), 1e-12);
    EXPECT_LT(testing::direction_gap(sol.p, n), 1e-12);
    EXPECT_GT(sol.conditioning, 1e10);
}

TEST(SolveHomogeneous, RepeatedCorrespondenceIsRankDeficient) {
    Rng rng(28);
    const auto s = testing::synthetic_scene(rng, 1);
    const std::vector<Correspondence> repeated(9, s.correspondences[0]);
    try {
        solve_homogeneous_lsq(build_measurement_matrix(repeated).M);
        FAIL() << "expected RankDeficient";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
    }
}

TEST(SolveHomogeneous, NoiseFreeSceneRecoversTrueP) {
    Rng rng(29);
    for (int i = 0; i < 50; ++i) {
        const auto s = testing::synthetic_scene(rng, 9 + 5 * i);
        const HomogeneousSolution sol = solve_homogeneous_lsq(build_measurement_matrix(s.correspondences).M);
        ASSERT_LT(testing::direction_gap(sol.p, stack_projection(line_projection_matrix(s.pose).P)), 1e-8);
    }
}

TEST(Residuals, ZeroForTrueProjection) {
    Rng rng(30);
    auto s = testing::synthetic_scene(rng, 30);
    s.correspondences[5].weight = 0;
    const MeasurementSystem sys = build_measurement_matrix(s.correspondences);
    const Vec18 p = stack_projection(line_projection_matrix(s.pose).P).normalized();
    const auto r = correspondence_residuals(sys, p);
    ASSERT_EQ(r.size(), 30U);
    for (double x : r) {
        EXPECT_LT(x, 1e-12);
    }
}

// Residuals are algebraic and scale with each line's Plücker norm, so the
// perturbed line is usually, not always, the worst one.
TEST(Residuals, PerturbedCorrespondenceStandsOut) {
    int hits = 0;
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng(1000 + seed);
        auto s = testing::synthetic_scene(rng, 40);
        const std::size_t bad = static_cast<std::size_t>(seed) % 40;
        s.correspondences[bad].line2d.coeffs = s.correspondences[bad].line2d.coeffs.norm() * testing::random_unit(rng);
        const MeasurementSystem sys = build_measurement_matrix(s.correspondences);
        const HomogeneousSolution sol = solve_homogeneous_lsq(sys.M);
        const auto r = correspondence_residuals(sys, sol.p);
        const auto worst = std::max_element(r.begin(), r.end()) - r.begin();
        hits += static_cast<std::size_t>(worst) == bad ? 1 : 0;
    }
    EXPECT_GE(hits, 90);
}

TEST(Stacking, RowMajorRoundTrip) {
    Vec18 p;
    std::iota(p.data(), p.data() + 18, 0.0);
    const Mat36 P = unstack_projection(p);
    EXPECT_EQ(P(0, 5), 5.0);
    EXPECT_EQ(P(1, 0), 6.0);
    EXPECT_EQ(P(2, 5), 17.0);
    EXPECT_EQ(stack_projection(P), p);
}

class NoiseFreeEstimate : public ::testing::TestWithParam<std::tuple<std::size_t, bool>> {};

TEST_P(NoiseFreeEstimate, ProportionalToTrueP) {
    const auto [n, prenormalize] = GetParam();
    const double tol = n >= 200 ? 1e-9 : 1e-8;
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng(2000 + seed);
        const auto s = testing::synthetic_scene(rng, n);
        const ProjectionEstimate est = estimate_projection_matrix(s.correspondences, prenormalize);
        const Mat36 P = line_projection_matrix(s.pose).P;
        ASSERT_LT(testing::direction_gap(stack_projection(est.P), stack_projection(P)), tol) << "seed " << seed;
        ASSERT_NEAR(est.P.norm(), 1.0, 1e-12);
    }
}

INSTANTIATE_TEST_SUITE_P(Sizes, NoiseFreeEstimate,
                         ::testing::Combine(::testing::Values(9, 25, 200), ::testing::Bool()));

TEST(Estimate, PrenormalizedAndRawAgreeWithoutNoise) {
    Rng rng(31);
    const auto s = testing::synthetic_scene(rng, 40);
    const ProjectionEstimate a = estimate_projection_matrix(s.correspondences, true);
    const ProjectionEstimate b = estimate_projection_matrix(s.correspondences, false);
    EXPECT_LT(testing::direction_gap(stack_projection(a.P), stack_projection(b.P)), 1e-8);
    EXPECT_TRUE(a.diagnostics.prenormalized);
    EXPECT_FALSE(b.diagnostics.prenormalized);
}

TEST(Estimate, CenteredEstimateRelatesByTranslation) {
    Rng rng(32);
    const auto s = testing::synthetic_scene(rng, 30);
    const ProjectionEstimate est = estimate_projection_matrix(s.correspondences, true);
    const Mat36 back = est.P_centered * Normalization3D{est.frame_origin}.D();
    EXPECT_LT(testing::direction_gap(stack_projection(back), stack_projection(est.P)), 1e-12);
}

TEST(Estimate, ScalingImageLinesChangesNothing) {
    Rng rng(33);
    auto s = testing::synthetic_scene(rng, 30);
    const ProjectionEstimate a = estimate_projection_matrix(s.correspondences, false);
    for (Correspondence &c : s.correspondences) {
        c.line2d.coeffs *= testing::uniform(rng, 0.01, 100.0) * (testing::uniform(rng, 0, 1) < 0.5 ? -1 : 1);
    }
    const ProjectionEstimate b = estimate_projection_matrix(s.correspondences, false);
    EXPECT_LT(testing::direction_gap(stack_projection(a.P), stack_projection(b.P)), 1e-12);
}

TEST(Estimate, MeanResidualGrowsWithNoise) {
    const std::vector<double> sigmas{0, 1, 2, 5, 10};
    std::vector<double> means;
    for (double sigma : sigmas) {
        double total = 0.0;
        std::size_t count = 0;
        BenchConfig cfg;
        cfg.n_lines = 25;
        cfg.sigma_p = sigma;
        for (std::size_t trial = 0; trial < 200; ++trial) {
            Rng rng = trial_rng(77, trial);
            const Scene scene = generate_scene(cfg, rng);
            const auto noisy = add_endpoint_noise(scene.image_segments, sigma, rng);
            const auto corr = build_correspondences(scene.segments, noisy, scene.intrinsics);
            const MeasurementSystem sys = build_measurement_matrix(corr);
            const HomogeneousSolution sol = solve_homogeneous_lsq(sys.M);
            for (double r : correspondence_residuals(sys, sol.p)) {
                total += r;
                ++count;
            }
        }
        means.push_back(total / static_cast<double>(count));
    }
    for (std::size_t i = 1; i < means.size(); ++i) {
        EXPECT_GT(means[i], means[i - 1]) << "sigma " << sigmas[i];
    }
}

} // namespace
} // namespace pnl
