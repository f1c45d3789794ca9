#include "lidarshape/cloud_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace lidarshape {
namespace {

bool parse_double(const std::string& token, double& out) {
    const char* first = token.data();
    const char* last = first + token.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    for (std::string t; in >> t;) tokens.push_back(t);
    return tokens;
}

Point3 parse_point(const std::vector<std::string>& tokens, std::size_t lineno, std::size_t expect_min,
                   std::size_t expect_max) {
    if (tokens.size() < expect_min || tokens.size() > expect_max) {
        throw ParseError("expected " + std::to_string(expect_min) + " coordinates, got " +
                             std::to_string(tokens.size()),
                         lineno);
    }
    Point3 p;
    for (int c = 0; c < 3; ++c) {
        double v = 0;
        if (!parse_double(tokens[c], v)) throw ParseError("invalid number '" + tokens[c] + "'", lineno);
        if (!std::isfinite(v)) throw ParseError("non-finite coordinate '" + tokens[c] + "'", lineno);
        p[c] = v;
    }
    return p;
}

PointCloud to_cloud(const std::vector<Point3>& pts) {
    PointCloud cloud;
    cloud.points.resize(3, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) cloud.points.col(static_cast<Eigen::Index>(i)) = pts[i];
    return cloud;
}

PointCloud load_xyz(std::ifstream& in) {
    std::vector<Point3> pts;
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        pts.push_back(parse_point(tokens, lineno, 3, 3));
    }
    if (pts.empty()) throw ParseError("file contains no points", lineno);
    return to_cloud(pts);
}

PointCloud load_ply(std::ifstream& in) {
    std::size_t lineno = 0;
    std::string line;
    auto next = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };
    if (!next() || line != "ply") throw ParseError("missing 'ply' magic", lineno);

    std::size_t vertex_count = 0;
    std::vector<std::string> vertex_props;
    bool in_vertex = false, seen_vertex = false, ascii = false;
    std::size_t skip_before_vertex = 0;  // rows of elements declared before "vertex"
    for (;;) {
        if (!next()) throw ParseError("unterminated ply header", lineno);
        auto tokens = split_ws(line);
        if (tokens.empty() || tokens[0] == "comment" || tokens[0] == "obj_info") continue;
        if (tokens[0] == "end_header") break;
        if (tokens[0] == "format") {
            if (tokens.size() < 2 || tokens[1] != "ascii") throw ParseError("only ascii ply is supported", lineno);
            ascii = true;
        } else if (tokens[0] == "element") {
            if (tokens.size() != 3) throw ParseError("malformed element line", lineno);
            std::size_t count = 0;
            try {
                count = std::stoul(tokens[2]);
            } catch (const std::exception&) {
                throw ParseError("invalid element count '" + tokens[2] + "'", lineno);
            }
            in_vertex = tokens[1] == "vertex";
            if (in_vertex) {
                vertex_count = count;
                seen_vertex = true;
            } else if (!seen_vertex) {
                skip_before_vertex += count;
            }
        } else if (tokens[0] == "property") {
            if (in_vertex) {
                if (tokens.size() != 3) throw ParseError("unsupported vertex property", lineno);
                vertex_props.push_back(tokens[2]);
            }
        } else {
            throw ParseError("unknown header keyword '" + tokens[0] + "'", lineno);
        }
    }
    if (!ascii) throw ParseError("ply format line missing", lineno);
    if (!seen_vertex || vertex_count == 0) throw ParseError("ply has no vertex element", lineno);
    if (vertex_props.size() < 3 || vertex_props[0] != "x" || vertex_props[1] != "y" || vertex_props[2] != "z")
        throw ParseError("vertex element must start with x y z properties", lineno);

    for (std::size_t i = 0; i < skip_before_vertex; ++i)
        if (!next()) throw ParseError("truncated ply body", lineno);

    std::vector<Point3> pts;
    pts.reserve(vertex_count);
    while (pts.size() < vertex_count) {
        if (!next()) throw ParseError("truncated ply body", lineno);
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        pts.push_back(parse_point(tokens, lineno, vertex_props.size(), vertex_props.size()));
    }
    return to_cloud(pts);
}

}  // namespace

CloudFormat parse_cloud_format(std::string_view name) {
    if (name == "xyz" || name == "xyz-ascii") return CloudFormat::XyzAscii;
    if (name == "ply" || name == "ply-ascii") return CloudFormat::PlyAscii;
    throw InvalidInput("unknown cloud format '" + std::string(name) + "'");
}

CloudFormat format_from_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".ply" ? CloudFormat::PlyAscii : CloudFormat::XyzAscii;
}

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    PointCloud cloud = format == CloudFormat::PlyAscii ? load_ply(in) : load_xyz(in);
    return cloud;
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    char buf[96];
    for (Eigen::Index i = 0; i < cloud.points.cols(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", cloud.points(0, i), cloud.points(1, i),
                      cloud.points(2, i));
        out << buf;
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace lidarshape
