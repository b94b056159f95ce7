// pnl: camera pose from 3D/2D line correspondences, plus the synthetic
// benchmark and runtime sweeps.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pnl/aor.h"
#include "pnl/bench.h"
#include "pnl/errors.h"
#include "pnl/estimator.h"
#include "pnl/io.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;
constexpr int kExitBreakdown = 4;

int exit_code_for(pnl::ErrorCode code) {
    using pnl::ErrorCode;
    switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::CoincidentPoints:
    case ErrorCode::LineThroughCameraCenter:
    case ErrorCode::InsufficientLines:
    case ErrorCode::EmptyLineSet:
    case ErrorCode::CoincidentEndpoints:
    case ErrorCode::SingularIntrinsics:
    case ErrorCode::ParseError:
    case ErrorCode::ConstraintViolation:
    case ErrorCode::JoinError:
        return kExitInput;
    case ErrorCode::TooFewInliers:
        return kExitBreakdown;
    default:
        return kExitSolver;
    }
}

// Writes to the named file, or to stdout for an empty name.
class Sink {
public:
    explicit Sink(const std::string &path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) {
                throw pnl::Error(pnl::ErrorCode::InvalidArgument, "cannot write '" + path + "'");
            }
        }
    }
    std::ostream &stream() { return file_.is_open() ? static_cast<std::ostream &>(file_) : std::cout; }

private:
    std::ofstream file_;
};

std::optional<pnl::Intrinsics> load_intrinsics(const std::string &path) {
    if (path.empty()) {
        return std::nullopt;
    }
    return pnl::read_intrinsics_file(path);
}

struct EstimateOptions {
    std::string lines3d;
    std::string lines2d;
    std::string intrinsics;
    std::string output;
    bool aor = false;
    bool no_prenorm = false;
};

int run_estimate(const EstimateOptions &opt) {
    const auto K = load_intrinsics(opt.intrinsics);
    const pnl::CorrespondenceSet set = pnl::parse_correspondences(opt.lines3d, opt.lines2d, K);
    pnl::PoseReport report;
    if (opt.aor) {
        report = pnl::make_pose_report(pnl::estimate_pose_aor(set.correspondences));
    } else {
        report = pnl::make_pose_report(pnl::estimate_pose(set.correspondences, !opt.no_prenorm),
                                       set.correspondences.size());
    }
    Sink sink(opt.output);
    sink.stream() << pnl::pose_to_json(report);
    return kExitOk;
}

struct SweepOptions {
    std::vector<std::size_t> n{25};
    std::vector<double> sigma{0.0};
    std::vector<double> outlier_fraction{0.0};
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    bool aor = false;
    bool no_prenorm = false;
    bool timing = false;
    double outlier_sigma = 100.0;
    double cube_side = 10.0;
    double distance = 25.0;
    unsigned threads = 0;
    std::string csv;
    std::string summary;
};

pnl::BenchConfig base_config(const SweepOptions &opt) {
    pnl::BenchConfig cfg;
    cfg.trials = opt.trials;
    cfg.seed = opt.seed;
    cfg.method = opt.aor ? pnl::Method::Aor : pnl::Method::Plain;
    cfg.prenormalize = !opt.no_prenorm;
    cfg.outlier_sigma = opt.outlier_sigma;
    cfg.cube_side = opt.cube_side;
    cfg.camera_distance = opt.distance;
    cfg.threads = opt.threads;
    return cfg;
}

// CSV goes to --csv or stdout; the summary goes to --summary, else to
// whichever of stdout/stderr the CSV left free.
void emit(const SweepOptions &opt, const std::vector<pnl::TrialRecord> &records, bool include_runtime,
          const std::string &summary) {
    {
        Sink csv(opt.csv);
        pnl::write_trials_csv(csv.stream(), records, true, include_runtime);
    }
    if (!opt.summary.empty()) {
        Sink out(opt.summary);
        out.stream() << summary;
    } else if (!opt.csv.empty()) {
        std::cout << summary;
    } else {
        std::cerr << summary;
    }
}

int run_benchmark(const SweepOptions &opt) {
    std::vector<pnl::TrialRecord> all;
    for (std::size_t n : opt.n) {
        for (double sigma : opt.sigma) {
            for (double fraction : opt.outlier_fraction) {
                pnl::BenchConfig cfg = base_config(opt);
                cfg.n_lines = n;
                cfg.sigma_p = sigma;
                cfg.outlier_fraction = fraction;
                cfg.validate();
                const auto records = pnl::run_monte_carlo(cfg);
                all.insert(all.end(), records.begin(), records.end());
            }
        }
    }
    const auto groups = pnl::summarize(all);
    emit(opt, all, opt.timing, pnl::summary_json(groups));
    return kExitOk;
}

int run_runtime(SweepOptions opt) {
    // Timing runs one trial at a time.
    opt.threads = 1;
    std::vector<pnl::TrialRecord> all;
    std::vector<double> xs;
    std::vector<double> medians;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t n : opt.n) {
        pnl::BenchConfig cfg = base_config(opt);
        cfg.n_lines = n;
        cfg.sigma_p = opt.sigma.front();
        cfg.validate();
        const auto records = pnl::run_monte_carlo(cfg);
        std::vector<double> times;
        for (const auto &r : records) {
            if (!r.failed) {
                times.push_back(r.runtime_ms);
            }
        }
        const double med = times.empty() ? 0.0 : pnl::median(times);
        xs.push_back(static_cast<double>(n));
        medians.push_back(med);
        rows.push_back({{"n", n}, {"median_ms", med}, {"trials", records.size()}, {"timed", times.size()}});
        all.insert(all.end(), records.begin(), records.end());
    }
    nlohmann::json summary{{"method", pnl::method_name(opt.aor ? pnl::Method::Aor : pnl::Method::Plain)},
                           {"runtime", rows}};
    if (xs.size() >= 2) {
        const pnl::LinearFit fit = pnl::fit_linear(xs, medians);
        summary["linear_fit"] = {{"slope_ms_per_line", fit.slope},
                                 {"intercept_ms", fit.intercept},
                                 {"r_squared", fit.r_squared}};
    }
    emit(opt, all, true, summary.dump(2) + "\n");
    return kExitOk;
}

struct ProjectOptions {
    std::string pose;
    std::string lines3d;
    std::string intrinsics;
    std::string output;
};

int run_project(const ProjectOptions &opt) {
    const pnl::CameraPose pose = pnl::read_pose_file(opt.pose);
    const auto K = load_intrinsics(opt.intrinsics);
    const auto lines3d = pnl::read_lines3d_file(opt.lines3d);
    const pnl::LineProjectionMatrix P = pnl::line_projection_matrix(pose);

    std::vector<pnl::LineRecord2D> lines2d;
    lines2d.reserve(lines3d.size());
    for (const pnl::LineRecord3D &rec : lines3d) {
        lines2d.push_back({rec.id, pnl::project_line(P, rec.line)});
    }
    Sink sink(opt.output);
    if (K) {
        pnl::write_lines2d_pixel(sink.stream(), lines2d, *K);
    } else {
        pnl::write_lines2d_normalized(sink.stream(), lines2d);
    }
    return kExitOk;
}

void add_sweep_options(CLI::App *cmd, SweepOptions &opt) {
    cmd->add_option("--trials", opt.trials, "Trials per configuration")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", opt.seed, "Base RNG seed");
    cmd->add_flag("--aor", opt.aor, "Use algebraic outlier rejection");
    cmd->add_flag("--no-prenorm", opt.no_prenorm, "Disable data prenormalization (plain estimator)");
    cmd->add_option("--outlier-sigma", opt.outlier_sigma, "Extra endpoint noise on outlier lines, px");
    cmd->add_option("--cube-side", opt.cube_side, "Side of the segment cube, m");
    cmd->add_option("--distance", opt.distance, "Camera distance from the cube center, m");
    cmd->add_option("--threads", opt.threads, "Worker threads (default: PNL_THREADS or all cores)");
    cmd->add_option("--csv", opt.csv, "Write per-trial CSV here instead of stdout");
    cmd->add_option("--summary", opt.summary, "Write the summary JSON here");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Camera pose from line correspondences"};
    app.require_subcommand(1);

    EstimateOptions est;
    CLI::App *estimate = app.add_subcommand("estimate", "Estimate a camera pose from line files");
    estimate->add_option("--lines3d", est.lines3d, "3D lines CSV")->required()->check(CLI::ExistingFile);
    estimate->add_option("--lines2d", est.lines2d, "2D lines CSV")->required()->check(CLI::ExistingFile);
    estimate->add_option("--intrinsics", est.intrinsics, "Intrinsics JSON")->check(CLI::ExistingFile);
    estimate->add_flag("--aor", est.aor, "Reject outliers");
    estimate->add_flag("--no-prenorm", est.no_prenorm, "Disable data prenormalization");
    estimate->add_option("--output,-o", est.output, "Write pose JSON here instead of stdout");

    SweepOptions bench;
    CLI::App *benchmark = app.add_subcommand("benchmark", "Monte Carlo accuracy sweep on synthetic scenes");
    benchmark->add_option("--n", bench.n, "Line counts")->delimiter(',')->check(CLI::Range(9, 1000000));
    benchmark->add_option("--sigma", bench.sigma, "Endpoint noise levels, px")->delimiter(',');
    benchmark->add_option("--outlier-fraction", bench.outlier_fraction, "Outlier fractions in [0, 1)")
        ->delimiter(',');
    benchmark->add_flag("--timing", bench.timing, "Record solver runtimes (output is then not reproducible)");
    add_sweep_options(benchmark, bench);

    SweepOptions timing;
    timing.n = {9, 100, 1000};
    CLI::App *runtime = app.add_subcommand("runtime", "Solver runtime versus line count");
    runtime->add_option("--n", timing.n, "Line counts")->delimiter(',')->check(CLI::Range(9, 1000000));
    runtime->add_option("--sigma", timing.sigma, "Endpoint noise, px")->delimiter(',');
    add_sweep_options(runtime, timing);

    ProjectOptions proj;
    CLI::App *project = app.add_subcommand("project", "Project 3D lines with a known pose");
    project->add_option("--pose", proj.pose, "Pose JSON")->required()->check(CLI::ExistingFile);
    project->add_option("--lines3d", proj.lines3d, "3D lines CSV")->required()->check(CLI::ExistingFile);
    project->add_option("--intrinsics", proj.intrinsics, "Intrinsics JSON; output pixel lines")
        ->check(CLI::ExistingFile);
    project->add_option("--output,-o", proj.output, "Write CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*estimate) {
            return run_estimate(est);
        }
        if (*benchmark) {
            return run_benchmark(bench);
        }
        if (*runtime) {
            return run_runtime(timing);
        }
        return run_project(proj);
    } catch (const pnl::Error &e) {
        std::cerr << "pnl: " << pnl::error_code_name(e.code()) << ": " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception &e) {
        std::cerr << "pnl: " << e.what() << '\n';
        return kExitInput;
    }
}
