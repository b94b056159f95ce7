#include "pnl/bench.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pnl/estimator.h"

namespace pnl {

namespace {

constexpr int kMaxCameraAttempts = 100;

Vec3 random_unit_vector(Rng &rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec3 d;
    do {
        d = Vec3(normal(rng), normal(rng), normal(rng));
    } while (d.norm() < 1e-12);
    return d.normalized();
}

// Camera on the sphere of radius `distance`, its -z axis through the origin,
// with uniformly random roll about that axis.
CameraPose random_looking_camera(double distance, Rng &rng) {
    const Vec3 z = random_unit_vector(rng);
    std::uniform_real_distribution<double> roll_dist(0.0, 2.0 * M_PI);
    const double roll = roll_dist(rng);

    const Vec3 helper = std::abs(z.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 x0 = (helper - helper.dot(z) * z).normalized();
    const Vec3 y0 = z.cross(x0);
    const Vec3 x = std::cos(roll) * x0 + std::sin(roll) * y0;
    const Vec3 y = z.cross(x);

    Mat3 R;
    R.row(0) = x.transpose();
    R.row(1) = y.transpose();
    R.row(2) = z.transpose();
    return CameraPose(R, distance * z);
}

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

nlohmann::json box_json(const BoxStats &b) {
    return {{"count", b.count},         {"median", b.median},
            {"q1", b.q1},               {"q3", b.q3},
            {"iqr", b.iqr},             {"whisker_low", b.whisker_low},
            {"whisker_high", b.whisker_high}, {"outliers", b.outliers}};
}

} // namespace

std::string_view method_name(Method method) { return method == Method::Aor ? "aor" : "plain"; }

void BenchConfig::validate() const {
    auto fail = [](const std::string &what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (n_lines < kMinLines) {
        fail("n_lines must be at least 9");
    }
    if (!(sigma_p >= 0.0) || !(outlier_sigma >= 0.0)) {
        fail("noise levels must be non-negative");
    }
    if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
        fail("outlier_fraction must lie in [0, 1)");
    }
    if (!(cube_side > 0.0) || !(camera_distance > 0.0) || !(focal > 0.0) || image_width <= 0 || image_height <= 0) {
        fail("geometric parameters must be positive");
    }
    if (!scene_offset.allFinite()) {
        fail("scene_offset must be finite");
    }
}

Intrinsics BenchConfig::intrinsics() const {
    return Intrinsics{focal, focal, 0.5 * image_width, 0.5 * image_height, 0.0};
}

Rng trial_rng(std::uint64_t seed, std::uint64_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    return Rng(seq);
}

bool scene_in_view(std::span<const Segment3D> segments, const CameraPose &pose, const Intrinsics &K, int width,
                   int height) {
    auto visible = [&](const Vec3 &X) {
        const Vec3 Xc = pose.to_camera(X);
        if (!(Xc.z() < 0.0)) {
            return false;
        }
        const Vec2 p = K.project(Xc);
        return p.x() >= 0.0 && p.x() <= width && p.y() >= 0.0 && p.y() <= height;
    };
    return std::all_of(segments.begin(), segments.end(),
                       [&](const Segment3D &s) { return visible(s.a) && visible(s.b); });
}

Scene generate_scene(const BenchConfig &config, Rng &rng) {
    config.validate();
    Scene scene;
    scene.intrinsics = config.intrinsics();

    const double half = 0.5 * config.cube_side;
    std::uniform_real_distribution<double> coord(-half, half);
    scene.segments.reserve(config.n_lines);
    for (std::size_t i = 0; i < config.n_lines; ++i) {
        Segment3D s;
        s.a = Vec3(coord(rng), coord(rng), coord(rng));
        s.b = Vec3(coord(rng), coord(rng), coord(rng));
        scene.segments.push_back(s);
    }

    bool accepted = false;
    for (int attempt = 1; attempt <= kMaxCameraAttempts && !accepted; ++attempt) {
        scene.camera_attempts = attempt;
        scene.true_pose = random_looking_camera(config.camera_distance, rng);
        accepted = scene_in_view(scene.segments, scene.true_pose, scene.intrinsics, config.image_width,
                                 config.image_height);
    }
    if (!accepted) {
        throw Error(ErrorCode::SceneGenerationFailed,
                    "no camera placement kept all segments in view after " + std::to_string(kMaxCameraAttempts) +
                        " attempts");
    }

    for (Segment3D &s : scene.segments) {
        s.a += config.scene_offset;
        s.b += config.scene_offset;
    }
    scene.true_pose.t += config.scene_offset;

    scene.image_segments.reserve(scene.segments.size());
    for (const Segment3D &s : scene.segments) {
        scene.image_segments.push_back({scene.intrinsics.project(scene.true_pose.to_camera(s.a)),
                                        scene.intrinsics.project(scene.true_pose.to_camera(s.b))});
    }
    return scene;
}

std::vector<Segment2D> add_endpoint_noise(std::span<const Segment2D> endpoints, double sigma_p, Rng &rng) {
    if (!(sigma_p >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "sigma_p must be non-negative");
    }
    std::vector<Segment2D> out(endpoints.begin(), endpoints.end());
    if (sigma_p == 0.0) {
        return out;
    }
    std::normal_distribution<double> noise(0.0, sigma_p);
    for (Segment2D &s : out) {
        s.a.x() += noise(rng);
        s.a.y() += noise(rng);
        s.b.x() += noise(rng);
        s.b.y() += noise(rng);
    }
    return out;
}

OutlierInjection apply_outliers(std::span<const Segment2D> endpoints, double fraction, double outlier_sigma,
                                Rng &rng) {
    if (!(fraction >= 0.0 && fraction < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "outlier fraction must lie in [0, 1)");
    }
    OutlierInjection out;
    out.endpoints.assign(endpoints.begin(), endpoints.end());
    out.outlier_mask.assign(endpoints.size(), false);

    const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(endpoints.size())));
    if (count == 0) {
        return out;
    }
    std::vector<std::size_t> order(endpoints.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `count` entries are a uniform sample.
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
        std::swap(order[i], order[pick(rng)]);
    }
    std::normal_distribution<double> noise(0.0, outlier_sigma);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t k = order[i];
        out.outlier_mask[k] = true;
        Segment2D &s = out.endpoints[k];
        s.a.x() += noise(rng);
        s.a.y() += noise(rng);
        s.b.x() += noise(rng);
        s.b.y() += noise(rng);
    }
    return out;
}

double rotation_angle(const Mat3 &R) {
    const Vec3 axis_sin = unskew(R); // sin(theta) * axis
    const double c = 0.5 * (R.trace() - 1.0);
    return std::atan2(axis_sin.norm(), c);
}

PoseError pose_errors(const CameraPose &estimated, const CameraPose &truth) {
    PoseError e;
    e.delta_tau = (estimated.t - truth.t).norm();
    e.delta_theta = rotation_angle(truth.R.transpose() * estimated.R) * 180.0 / M_PI;
    return e;
}

std::vector<Correspondence> build_correspondences(std::span<const Segment3D> segments,
                                                  std::span<const Segment2D> image_segments, const Intrinsics &K) {
    if (segments.size() != image_segments.size()) {
        throw Error(ErrorCode::InvalidArgument, "segment count mismatch");
    }
    std::vector<Correspondence> out;
    out.reserve(segments.size());
    for (std::size_t i = 0; i < segments.size(); ++i) {
        out.push_back({plucker_from_endpoints(segments[i].a, segments[i].b),
                       line2d_from_endpoints(image_segments[i].a, image_segments[i].b, K), 1});
    }
    return out;
}

TrialRecord run_trial(const BenchConfig &config, std::size_t trial) {
    TrialRecord record;
    record.trial = trial;
    record.method = config.method;
    record.n = config.n_lines;
    record.sigma_p = config.sigma_p;
    record.outlier_fraction = config.outlier_fraction;
    record.outlier_recall = std::numeric_limits<double>::quiet_NaN();

    try {
        Rng rng = trial_rng(config.seed, trial);
        const Scene scene = generate_scene(config, rng);
        const auto noisy = add_endpoint_noise(scene.image_segments, config.sigma_p, rng);
        const OutlierInjection injected = apply_outliers(noisy, config.outlier_fraction, config.outlier_sigma, rng);
        const auto correspondences = build_correspondences(scene.segments, injected.endpoints, scene.intrinsics);

        CameraPose estimated;
        const auto start = std::chrono::steady_clock::now();
        if (config.method == Method::Aor) {
            const AorResult result = estimate_pose_aor(correspondences, config.aor);
            record.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                                    .count();
            estimated = result.pose;
            record.conditioning = result.diagnostics.conditioning;
            record.inliers = result.diagnostics.active_lines;
            record.aor_iterations = result.iterations;

            std::size_t outliers = 0;
            std::size_t rejected = 0;
            for (std::size_t i = 0; i < injected.outlier_mask.size(); ++i) {
                if (injected.outlier_mask[i]) {
                    ++outliers;
                    rejected += result.inlier_mask[i] ? 0 : 1;
                }
            }
            if (outliers > 0) {
                record.outlier_recall = static_cast<double>(rejected) / static_cast<double>(outliers);
            }
        } else {
            const PoseEstimate result = estimate_pose(correspondences, config.prenormalize);
            record.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                                    .count();
            estimated = result.pose;
            record.conditioning = result.diagnostics.conditioning;
            record.inliers = result.diagnostics.active_lines;
        }
        record.error = pose_errors(estimated, scene.true_pose);
    } catch (const Error &e) {
        record.failed = true;
        record.failure = e.code();
        record.error.delta_theta = std::numeric_limits<double>::quiet_NaN();
        record.error.delta_tau = std::numeric_limits<double>::quiet_NaN();
    }
    return record;
}

unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char *env = std::getenv("PNL_THREADS")) {
        const long value = std::strtol(env, nullptr, 10);
        if (value > 0) {
            return static_cast<unsigned>(value);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<TrialRecord> run_monte_carlo(const BenchConfig &config) {
    config.validate();
    config.aor.validate();
    std::vector<TrialRecord> records(config.trials);
    const unsigned threads =
        std::min<unsigned>(resolve_thread_count(config.threads), static_cast<unsigned>(std::max<std::size_t>(1, config.trials)));

    if (threads <= 1) {
        for (std::size_t i = 0; i < config.trials; ++i) {
            records[i] = run_trial(config, i);
        }
        return records;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < config.trials; i = next++) {
                records[i] = run_trial(config, i);
            }
        });
    }
    for (std::thread &t : workers) {
        t.join();
    }
    return records;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

BoxStats box_stats(std::span<const double> values) {
    BoxStats b;
    std::vector<double> v;
    v.reserve(values.size());
    for (double x : values) {
        if (!std::isnan(x)) {
            v.push_back(x);
        }
    }
    b.count = v.size();
    if (v.empty()) {
        b.median = b.q1 = b.q3 = b.iqr = b.whisker_low = b.whisker_high = std::numeric_limits<double>::quiet_NaN();
        return b;
    }
    b.median = quantile(v, 0.5);
    b.q1 = quantile(v, 0.25);
    b.q3 = quantile(v, 0.75);
    b.iqr = b.q3 - b.q1;
    const double lo = b.q1 - kWhiskerIqrFactor * b.iqr;
    const double hi = b.q3 + kWhiskerIqrFactor * b.iqr;
    b.whisker_low = std::numeric_limits<double>::infinity();
    b.whisker_high = -std::numeric_limits<double>::infinity();
    for (double x : v) {
        if (x < lo || x > hi) {
            ++b.outliers;
        } else {
            b.whisker_low = std::min(b.whisker_low, x);
            b.whisker_high = std::max(b.whisker_high, x);
        }
    }
    return b;
}

std::vector<GroupSummary> summarize(std::span<const TrialRecord> records) {
    struct Group {
        GroupSummary summary;
        std::vector<double> theta, tau, runtime;
    };
    std::vector<Group> groups;
    for (const TrialRecord &r : records) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group &g) {
            return g.summary.method == r.method && g.summary.n == r.n && g.summary.sigma_p == r.sigma_p &&
                   g.summary.outlier_fraction == r.outlier_fraction;
        });
        if (it == groups.end()) {
            Group g;
            g.summary.method = r.method;
            g.summary.n = r.n;
            g.summary.sigma_p = r.sigma_p;
            g.summary.outlier_fraction = r.outlier_fraction;
            groups.push_back(std::move(g));
            it = std::prev(groups.end());
        }
        ++it->summary.trials;
        if (r.failed) {
            ++it->summary.failures;
            continue;
        }
        it->theta.push_back(r.error.delta_theta);
        it->tau.push_back(r.error.delta_tau);
        it->runtime.push_back(r.runtime_ms);
    }
    std::vector<GroupSummary> out;
    out.reserve(groups.size());
    for (Group &g : groups) {
        g.summary.delta_theta = box_stats(g.theta);
        g.summary.delta_tau = box_stats(g.tau);
        g.summary.runtime_ms = box_stats(g.runtime);
        out.push_back(g.summary);
    }
    return out;
}

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "linear fit needs at least two paired samples");
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit fit;
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

void write_trials_csv(std::ostream &out, std::span<const TrialRecord> records, bool include_header,
                      bool include_runtime) {
    if (include_header) {
        out << "trial,method,n,sigma_p,outlier_fraction,delta_theta_deg,delta_tau_m,runtime_ms,failed\n";
    }
    for (const TrialRecord &r : records) {
        out << r.trial << ',' << method_name(r.method) << ',' << r.n << ',' << format_double(r.sigma_p) << ','
            << format_double(r.outlier_fraction) << ',' << format_double(r.error.delta_theta) << ','
            << format_double(r.error.delta_tau) << ',' << format_double(include_runtime ? r.runtime_ms : 0.0) << ','
            << (r.failed ? 1 : 0) << '\n';
    }
}

std::string summary_json(std::span<const GroupSummary> groups) {
    nlohmann::json arr = nlohmann::json::array();
    for (const GroupSummary &g : groups) {
        arr.push_back({{"method", method_name(g.method)},
                       {"n", g.n},
                       {"sigma_p", g.sigma_p},
                       {"outlier_fraction", g.outlier_fraction},
                       {"trials", g.trials},
                       {"failures", g.failures},
                       {"delta_theta_deg", box_json(g.delta_theta)},
                       {"delta_tau_m", box_json(g.delta_tau)},
                       {"runtime_ms", box_json(g.runtime_ms)}});
    }
    return nlohmann::json{{"groups", arr}}.dump(2) + "\n";
}

} // namespace pnl
