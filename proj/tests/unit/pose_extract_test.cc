#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "pnl/errors.h"
#include "pnl/estimator.h"
#include "pnl/pose_extract.h"
#include "test_support.h"

namespace pnl {
namespace {

using testing::Rng;

std::vector<PluckerLine> lines_in_front(const CameraPose &pose, Rng &rng, std::size_t n) {
    std::vector<PluckerLine> lines;
    for (std::size_t i = 0; i < n; ++i) {
        lines.push_back(plucker_from_endpoints(testing::point_in_front(pose, rng), testing::point_in_front(pose, rng)));
    }
    return lines;
}

TEST(RecoverScale, Identity) { EXPECT_DOUBLE_EQ(recover_scale(line_projection_matrix(CameraPose()).P), 1.0); }

TEST(RecoverScale, DoubledBlock) {
    Mat36 P = Mat36::Zero();
    P.leftCols<3>() = 2.0 * Mat3::Identity();
    EXPECT_DOUBLE_EQ(recover_scale(P), 0.5);
}

TEST(RecoverScale, NegativeDeterminant) {
    Mat36 P = Mat36::Zero();
    P.leftCols<3>() = -2.0 * Mat3::Identity();
    const double s = recover_scale(P);
    EXPECT_DOUBLE_EQ(s, -0.5);
    EXPECT_NEAR((s * P.leftCols<3>()).determinant(), 1.0, 1e-10);
}

TEST(RecoverScale, DeterminantIsOneForRandomBlocks) {
    Rng rng(41);
    for (int i = 0; i < 10000; ++i) {
        Mat36 P = Mat36::Random() * testing::uniform(rng, 1e-2, 1e2);
        const double s = recover_scale(P);
        ASSERT_NEAR((s * P.leftCols<3>()).determinant(), 1.0, 1e-10);
    }
}

TEST(RecoverScale, SingularBlock) {
    Mat36 P = Mat36::Random();
    P.col(2) = P.col(0) + P.col(1);
    try {
        recover_scale(P);
        FAIL() << "expected SingularRotationBlock";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularRotationBlock);
    }
}

TEST(Decompose, PureTranslationReconstructs) {
    const Vec3 t(1, 0, 0);
    const Mat3 input = skew(-t);
    const DecompositionResult d = decompose_essential_like(input);
    bool found = false;
    for (const EssentialCandidate &c : {d.candidate_a, d.candidate_b}) {
        found = found || (c.R * c.S - input).norm() < 1e-10;
    }
    EXPECT_TRUE(found);
    EXPECT_NEAR(d.sigma, 1.0, 1e-12);
}

TEST(Decompose, SingularValueStructure) {
    Rng rng(42);
    for (int i = 0; i < 1000; ++i) {
        const CameraPose pose = testing::random_pose(rng);
        const DecompositionResult d = decompose_essential_like(line_projection_matrix(pose).right());
        const double tn = pose.t.norm();
        ASSERT_NEAR(d.singular_values(0), tn, 1e-10 * std::max(1.0, tn));
        ASSERT_NEAR(d.singular_values(1), tn, 1e-10 * std::max(1.0, tn));
        ASSERT_NEAR(d.singular_values(2), 0.0, 1e-10 * std::max(1.0, tn));
        ASSERT_NEAR(d.sigma, tn, 1e-10 * std::max(1.0, tn));
    }
}

TEST(Decompose, CandidatesAreRotationsAndSkewForArbitraryInput) {
    Rng rng(43);
    for (int i = 0; i < 10000; ++i) {
        const Mat3 X = Mat3::Random() * testing::uniform(rng, 0.1, 100);
        const DecompositionResult d = decompose_essential_like(X);
        for (const EssentialCandidate &c : {d.candidate_a, d.candidate_b}) {
            ASSERT_LT((c.R.transpose() * c.R - Mat3::Identity()).norm(), 1e-10);
            ASSERT_NEAR(c.R.determinant(), 1.0, 1e-10);
            ASSERT_LT((c.S + c.S.transpose()).norm(), 1e-10 * std::max(1.0, c.S.norm()));
        }
    }
}

TEST(Decompose, ZeroTranslationFlagged) {
    const DecompositionResult d = decompose_essential_like(Mat3::Zero());
    EXPECT_TRUE(d.degenerate_translation);
    EXPECT_EQ(d.candidate_a.S, Mat3::Zero());
    EXPECT_EQ(d.candidate_b.S, Mat3::Zero());
}

TEST(Disambiguate, PicksTrueCandidate) {
    Rng rng(44);
    for (int i = 0; i < 1000; ++i) {
        const CameraPose pose = testing::facing_pose(rng);
        const auto lines = testing::lines_near_origin(pose, rng, 5);
        const DecompositionResult d = decompose_essential_like(line_projection_matrix(pose).right());
        const PoseChoice c = disambiguate(d, lines);
        ASSERT_LT((c.pose.R - pose.R).norm(), 1e-9);
        ASSERT_LT((c.pose.t - pose.t).norm(), 1e-9 * std::max(1.0, pose.t.norm()));
        const int winner = c.chosen == Candidate::A ? c.in_front_a : c.in_front_b;
        const int loser = c.chosen == Candidate::A ? c.in_front_b : c.in_front_a;
        ASSERT_EQ(winner, 5);
        ASSERT_EQ(loser, 0);
    }
}

TEST(Disambiguate, EmptyLineSet) {
    const DecompositionResult d = decompose_essential_like(skew(Vec3(1, 2, 3)));
    try {
        disambiguate(d, std::vector<PluckerLine>{});
        FAIL() << "expected EmptyLineSet";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyLineSet);
    }
}

TEST(Disambiguate, TieIsAmbiguous) {
    Rng rng(45);
    const CameraPose pose = testing::random_pose(rng);
    const DecompositionResult d = decompose_essential_like(line_projection_matrix(pose).right());
    const CameraPose a(d.candidate_a.R, d.candidate_a.position());
    const CameraPose b(d.candidate_b.R, d.candidate_b.position());
    auto in_front = [](const CameraPose &p, const PluckerLine &L) {
        return p.to_camera(L.closest_point_to_origin()).z() < 0.0;
    };
    std::vector<PluckerLine> only_a;
    std::vector<PluckerLine> only_b;
    while (only_a.empty() || only_b.empty()) {
        const PluckerLine L =
            plucker_from_endpoints(testing::random_vec3(rng, -40, 40), testing::random_vec3(rng, -40, 40));
        if (in_front(a, L) && !in_front(b, L)) {
            only_a.push_back(L);
        } else if (in_front(b, L) && !in_front(a, L)) {
            only_b.push_back(L);
        }
    }
    EXPECT_EQ(disambiguate(d, only_a).chosen, Candidate::A);
    EXPECT_EQ(disambiguate(d, only_b).chosen, Candidate::B);
    const std::vector<PluckerLine> both{only_a[0], only_b[0]};
    try {
        disambiguate(d, both);
        FAIL() << "expected AmbiguousPose";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::AmbiguousPose);
    }
}

TEST(ExtractPose, ExactRoundTrip) {
    Rng rng(46);
    for (int i = 0; i < 10000; ++i) {
        const CameraPose pose = testing::facing_pose(rng);
        const auto lines = testing::lines_near_origin(pose, rng, 3);
        const Mat36 P = line_projection_matrix(pose).P * testing::uniform(rng, 0.01, 100.0);
        const PoseExtraction e = extract_pose(P, lines);
        ASSERT_LT((e.pose.R - pose.R).norm(), 1e-10);
        ASSERT_LT((e.pose.t - pose.t).norm(), 1e-10 * std::max(1.0, pose.t.norm()));
    }
}

TEST(ExtractPose, SignOfEstimateIrrelevant) {
    Rng rng(47);
    for (int i = 0; i < 1000; ++i) {
        const CameraPose pose = testing::facing_pose(rng);
        const auto lines = testing::lines_near_origin(pose, rng, 7);
        Mat36 P = line_projection_matrix(pose).P + 1e-3 * Mat36::Random();
        const PoseExtraction a = extract_pose(P, lines);
        const PoseExtraction b = extract_pose(-P, lines);
        ASSERT_LT((a.pose.R - b.pose.R).norm(), 1e-12);
        ASSERT_LT((a.pose.t - b.pose.t).norm(), 1e-12 * std::max(1.0, a.pose.t.norm()));
    }
}

TEST(ExtractPose, AgreesWithAlternativeExtractionOnExactInput) {
    Rng rng(48);
    for (int i = 0; i < 1000; ++i) {
        const CameraPose pose = testing::facing_pose(rng);
        const auto lines = testing::lines_near_origin(pose, rng, 3);
        const Mat36 P = line_projection_matrix(pose).P;
        const PoseExtraction e = extract_pose(P, lines);
        const CameraPose alt = testing::alternative_extraction(P);
        ASSERT_LT((e.pose.R - alt.R).norm(), 1e-10);
        ASSERT_LT((e.pose.t - alt.t).norm(), 1e-9);
    }
}

TEST(ExtractPose, ZeroTranslationSurfaced) {
    Rng rng(49);
    const CameraPose pose(testing::random_rotation(rng), Vec3::Zero());
    const auto lines = lines_in_front(pose, rng, 5);
    try {
        extract_pose(line_projection_matrix(pose).P, lines);
        FAIL() << "expected DegenerateTranslation";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateTranslation);
    }
}

TEST(ExtractPose, NoiseFreeEstimatorIsExact) {
    for (int seed = 0; seed < 200; ++seed) {
        Rng rng(3000 + seed);
        const auto s = testing::synthetic_scene(rng, 9 + seed % 50);
        for (bool prenormalize : {true, false}) {
            const PoseEstimate est = estimate_pose(s.correspondences, prenormalize);
            ASSERT_LT(testing::rotation_angle_deg(s.pose.R, est.pose.R), 1e-6) << "seed " << seed;
            ASSERT_LT((est.pose.t - s.pose.t).norm(), 1e-6) << "seed " << seed;
        }
    }
}

TEST(EulerFromRotation, Identity) {
    const EulerAngles e = euler_from_rotation(Mat3::Identity());
    EXPECT_EQ(e.alpha, 0.0);
    EXPECT_EQ(e.beta, 0.0);
    EXPECT_EQ(e.gamma, 0.0);
}

TEST(EulerFromRotation, QuarterTurnAboutZ) {
    const EulerAngles e = euler_from_rotation(Eigen::AngleAxisd(M_PI / 2, Vec3::UnitZ()).toRotationMatrix());
    EXPECT_NEAR(e.alpha, 0.0, 1e-15);
    EXPECT_NEAR(e.beta, 0.0, 1e-15);
    EXPECT_NEAR(e.gamma, M_PI / 2, 1e-15);
}

TEST(EulerFromRotation, RandomRoundTrip) {
    Rng rng(50);
    const double limit = 89.0 * M_PI / 180.0;
    for (int i = 0; i < 10000; ++i) {
        const EulerAngles in{testing::uniform(rng, -M_PI, M_PI), testing::uniform(rng, -limit, limit),
                             testing::uniform(rng, -M_PI, M_PI)};
        const EulerAngles out = euler_from_rotation(rotation_from_euler(in));
        ASSERT_NEAR(out.alpha, in.alpha, 1e-10);
        ASSERT_NEAR(out.beta, in.beta, 1e-10);
        ASSERT_NEAR(out.gamma, in.gamma, 1e-10);
    }
}

TEST(EulerFromRotation, RecomposesAnyRotation) {
    Rng rng(51);
    for (int i = 0; i < 10000; ++i) {
        const Mat3 R = testing::random_rotation(rng);
        const EulerAngles e = euler_from_rotation(R);
        ASSERT_LE(std::abs(e.beta), M_PI / 2);
        ASSERT_LT((rotation_from_euler(e) - R).norm(), 1e-10);
    }
}

TEST(EulerFromRotation, GimbalLockSetsGammaToZero) {
    for (double beta : {M_PI / 2, -M_PI / 2}) {
        const Mat3 R = rotation_from_euler({0.7, beta, -0.4});
        const EulerAngles e = euler_from_rotation(R);
        EXPECT_EQ(e.gamma, 0.0);
        EXPECT_NEAR(e.beta, beta, 1e-8);
        EXPECT_LT((rotation_from_euler(e) - R).norm(), 1e-10);
    }
}

} // namespace
} // namespace pnl
