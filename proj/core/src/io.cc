#include "pnl/io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/LU>
#include <json.hpp>

#include "pnl/errors.h"
#include "pnl/pose_extract.h"

namespace pnl {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                  : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

[[noreturn]] void parse_error(std::string_view source, std::size_t line_no, const std::string &what) {
    throw Error(ErrorCode::ParseError, std::string(source) + ":" + std::to_string(line_no) + ": " + what);
}

double parse_number(std::string_view field, std::string_view source, std::size_t line_no) {
    double value = 0.0;
    const char *begin = field.data();
    const char *end = field.data() + field.size();
    if (!field.empty() && *begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        parse_error(source, line_no, "invalid number '" + std::string(field) + "'");
    }
    return value;
}

// A parsed CSV table: the header's column names and each record's values.
struct Table {
    std::string header;
    struct Row {
        std::size_t line_no;
        std::string id;
        std::vector<double> values;
    };
    std::vector<Row> rows;
};

Table read_table(std::istream &in, std::string_view source, std::span<const std::string_view> accepted_headers) {
    Table table;
    std::string raw;
    std::size_t line_no = 0;
    std::size_t columns = 0;
    std::unordered_set<std::string> seen;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto fields = split_fields(line);
        if (table.header.empty()) {
            std::string header;
            for (std::size_t i = 0; i < fields.size(); ++i) {
                header += (i ? "," : "") + std::string(fields[i]);
            }
            bool known = false;
            for (std::string_view h : accepted_headers) {
                known = known || header == h;
            }
            if (!known) {
                parse_error(source, line_no, "unrecognized header '" + header + "'");
            }
            table.header = header;
            columns = fields.size();
            continue;
        }
        if (fields.size() != columns) {
            parse_error(source, line_no,
                        "expected " + std::to_string(columns) + " fields, got " + std::to_string(fields.size()));
        }
        Table::Row row{line_no, std::string(fields[0]), {}};
        if (row.id.empty()) {
            parse_error(source, line_no, "empty id");
        }
        if (!seen.insert(row.id).second) {
            parse_error(source, line_no, "duplicate id '" + row.id + "'");
        }
        for (std::size_t i = 1; i < fields.size(); ++i) {
            row.values.push_back(parse_number(fields[i], source, line_no));
        }
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) {
        parse_error(source, line_no, "missing header row");
    }
    return table;
}

constexpr std::string_view kHeader3DEndpoints = "id,ax,ay,az,bx,by,bz";
constexpr std::string_view kHeader3DPlucker = "id,ux,uy,uz,vx,vy,vz";
constexpr std::string_view kHeader2DEndpoints = "id,x1,y1,x2,y2";
constexpr std::string_view kHeader2DPixelLine = "id,a,b,c";
constexpr std::string_view kHeader2DNormalized = "id,lx,ly,lw";

std::ifstream open_input(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ParseError, "cannot open '" + path.string() + "'");
    }
    return in;
}

std::string slurp(const std::filesystem::path &path) {
    std::ifstream in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::exception &e) {
        throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
    }
}

double json_number(const json &j, const char *key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw Error(ErrorCode::ParseError, std::string("missing numeric field '") + key + "'");
    }
    return j.at(key).get<double>();
}

template <typename Vec>
Vec json_vector(const json &j, const char *key) {
    Vec out;
    if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != static_cast<std::size_t>(out.size())) {
        throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be an array of " +
                                               std::to_string(out.size()) + " numbers");
    }
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const json &v = j.at(key).at(static_cast<std::size_t>(i));
        if (!v.is_number()) {
            throw Error(ErrorCode::ParseError, std::string("non-numeric entry in '") + key + "'");
        }
        out(i) = v.get<double>();
    }
    return out;
}

void write_row(std::ostream &out, const std::string &id, std::initializer_list<double> values) {
    out << id;
    for (double v : values) {
        out << ',' << v;
    }
    out << '\n';
}

} // namespace

std::vector<LineRecord3D> read_lines3d(std::istream &in, std::string_view source) {
    const std::string_view headers[] = {kHeader3DEndpoints, kHeader3DPlucker};
    const Table table = read_table(in, source, headers);
    const bool endpoints = table.header == kHeader3DEndpoints;

    std::vector<LineRecord3D> records;
    records.reserve(table.rows.size());
    for (const Table::Row &row : table.rows) {
        const auto &x = row.values;
        LineRecord3D record{row.id, {}};
        if (endpoints) {
            try {
                record.line = plucker_from_endpoints(Vec3(x[0], x[1], x[2]), Vec3(x[3], x[4], x[5]));
            } catch (const Error &e) {
                parse_error(source, row.line_no, e.what());
            }
        } else {
            record.line = PluckerLine(Vec3(x[0], x[1], x[2]), Vec3(x[3], x[4], x[5]));
            if (record.line.u.isZero(0.0) && record.line.v.isZero(0.0)) {
                throw Error(ErrorCode::ConstraintViolation, std::string(source) + ":" +
                                                                std::to_string(row.line_no) + ": zero Plücker vector");
            }
            if (record.line.v.isZero(0.0)) {
                throw Error(ErrorCode::ConstraintViolation, std::string(source) + ":" + std::to_string(row.line_no) +
                                                                ": Plücker direction is zero (line at infinity)");
            }
            const double residual = record.line.constraint_residual();
            if (residual > kPluckerInputTolerance) {
                std::ostringstream msg;
                msg << source << ":" << row.line_no << ": bilinear constraint violated (|u.v|/(|u||v|) = "
                    << residual << ")";
                throw Error(ErrorCode::ConstraintViolation, msg.str());
            }
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<LineRecord3D> read_lines3d_file(const std::filesystem::path &path) {
    std::ifstream in = open_input(path);
    return read_lines3d(in, path.string());
}

std::vector<LineRecord2D> read_lines2d(std::istream &in, const std::optional<Intrinsics> &K, std::string_view source) {
    const std::string_view headers[] = {kHeader2DEndpoints, kHeader2DPixelLine, kHeader2DNormalized};
    const Table table = read_table(in, source, headers);
    const Intrinsics intrinsics = K.value_or(Intrinsics{});
    intrinsics.validate();

    std::vector<LineRecord2D> records;
    records.reserve(table.rows.size());
    for (const Table::Row &row : table.rows) {
        const auto &x = row.values;
        LineRecord2D record{row.id, {}};
        try {
            if (table.header == kHeader2DEndpoints) {
                record.line = line2d_from_endpoints(Vec2(x[0], x[1]), Vec2(x[2], x[3]), intrinsics);
            } else if (table.header == kHeader2DPixelLine) {
                record.line = apply_intrinsics(Vec3(x[0], x[1], x[2]), intrinsics);
            } else {
                record.line = ImageLine2D(x[0], x[1], x[2]);
            }
        } catch (const Error &e) {
            parse_error(source, row.line_no, e.what());
        }
        if (record.line.coeffs.isZero(0.0)) {
            parse_error(source, row.line_no, "zero image line");
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<LineRecord2D> read_lines2d_file(const std::filesystem::path &path, const std::optional<Intrinsics> &K) {
    std::ifstream in = open_input(path);
    return read_lines2d(in, K, path.string());
}

CorrespondenceSet join_correspondences(std::span<const LineRecord3D> lines3d, std::span<const LineRecord2D> lines2d) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < lines3d.size(); ++i) {
        index.emplace(lines3d[i].id, i);
    }
    CorrespondenceSet set;
    set.ids.reserve(lines2d.size());
    set.correspondences.reserve(lines2d.size());
    for (const LineRecord2D &rec : lines2d) {
        const auto it = index.find(rec.id);
        if (it == index.end()) {
            throw Error(ErrorCode::JoinError, "2D line '" + rec.id + "' has no matching 3D line");
        }
        set.ids.push_back(rec.id);
        set.correspondences.push_back({lines3d[it->second].line, rec.line, 1});
    }
    return set;
}

CorrespondenceSet parse_correspondences(const std::filesystem::path &path3d, const std::filesystem::path &path2d,
                                        const std::optional<Intrinsics> &K) {
    const auto lines3d = read_lines3d_file(path3d);
    const auto lines2d = read_lines2d_file(path2d, K);
    return join_correspondences(lines3d, lines2d);
}

void write_lines3d_plucker(std::ostream &out, std::span<const LineRecord3D> records) {
    const auto precision = out.precision(17);
    out << kHeader3DPlucker << '\n';
    for (const LineRecord3D &r : records) {
        const PluckerLine &L = r.line;
        write_row(out, r.id, {L.u.x(), L.u.y(), L.u.z(), L.v.x(), L.v.y(), L.v.z()});
    }
    out.precision(precision);
}

void write_lines2d_normalized(std::ostream &out, std::span<const LineRecord2D> records) {
    const auto precision = out.precision(17);
    out << kHeader2DNormalized << '\n';
    for (const LineRecord2D &r : records) {
        write_row(out, r.id, {r.line.coeffs.x(), r.line.coeffs.y(), r.line.coeffs.z()});
    }
    out.precision(precision);
}

void write_lines2d_pixel(std::ostream &out, std::span<const LineRecord2D> records, const Intrinsics &K) {
    K.validate();
    // Inverse of apply_intrinsics: l_px = K^-T F l.
    const Mat3 to_pixel = K.camera_matrix().inverse().transpose() * Eigen::Vector3d(1, 1, -1).asDiagonal();
    const auto precision = out.precision(17);
    out << kHeader2DPixelLine << '\n';
    for (const LineRecord2D &r : records) {
        const Vec3 l = to_pixel * r.line.coeffs;
        write_row(out, r.id, {l.x(), l.y(), l.z()});
    }
    out.precision(precision);
}

Intrinsics intrinsics_from_json(std::string_view text) {
    const json j = parse_json(text);
    Intrinsics K;
    K.fx = json_number(j, "fx");
    K.fy = json_number(j, "fy");
    K.cx = json_number(j, "cx");
    K.cy = json_number(j, "cy");
    if (j.contains("skew")) {
        K.skew = json_number(j, "skew");
    }
    K.validate();
    return K;
}

Intrinsics read_intrinsics_file(const std::filesystem::path &path) { return intrinsics_from_json(slurp(path)); }

PoseReport make_pose_report(const PoseEstimate &estimate, std::size_t total) {
    PoseReport report;
    report.pose = estimate.pose;
    report.scale = estimate.extraction.scale;
    report.candidate = estimate.extraction.chosen;
    report.conditioning = estimate.diagnostics.conditioning;
    report.inliers = estimate.diagnostics.active_lines;
    report.total = total;
    report.prenormalized = estimate.diagnostics.prenormalized;
    return report;
}

PoseReport make_pose_report(const AorResult &result) {
    PoseReport report;
    report.pose = result.pose;
    report.scale = result.extraction.scale;
    report.candidate = result.extraction.chosen;
    report.conditioning = result.diagnostics.conditioning;
    report.inliers = result.diagnostics.active_lines;
    report.total = result.inlier_mask.size();
    report.aor = true;
    report.aor_iterations = result.iterations;
    report.prenormalized = result.diagnostics.prenormalized;
    return report;
}

std::string pose_to_json(const PoseReport &report) {
    const EulerAngles e = euler_from_rotation(report.pose.R);
    constexpr double kDeg = 180.0 / M_PI;

    json j;
    json R = json::array();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            R.push_back(report.pose.R(r, c));
        }
    }
    j["R"] = R;
    j["t"] = {report.pose.t.x(), report.pose.t.y(), report.pose.t.z()};
    j["euler_deg"] = {{"alpha", e.alpha * kDeg}, {"beta", e.beta * kDeg}, {"gamma", e.gamma * kDeg}};
    j["scale"] = report.scale;
    j["candidate"] = report.candidate == Candidate::A ? "A" : "B";
    json diag;
    diag["conditioning"] = std::isfinite(report.conditioning) ? json(report.conditioning) : json(nullptr);
    diag["inliers"] = report.inliers;
    diag["correspondences"] = report.total;
    diag["prenormalized"] = report.prenormalized;
    diag["method"] = report.aor ? "aor" : "plain";
    if (report.aor) {
        diag["aor_iterations"] = report.aor_iterations;
    }
    j["diagnostics"] = diag;
    return j.dump(2) + "\n";
}

CameraPose pose_from_json(std::string_view text) {
    const json j = parse_json(text);
    const auto r = json_vector<Eigen::Matrix<double, 9, 1>>(j, "R");
    CameraPose pose;
    for (int i = 0; i < 9; ++i) {
        pose.R(i / 3, i % 3) = r(i);
    }
    pose.t = json_vector<Vec3>(j, "t");
    // Parsed values carry 17 digits; allow for the round trip.
    if (!pose.is_valid(1e-9)) {
        throw Error(ErrorCode::InvalidArgument, "pose rotation is not orthonormal with det 1");
    }
    return pose;
}

CameraPose read_pose_file(const std::filesystem::path &path) { return pose_from_json(slurp(path)); }

} // namespace pnl
