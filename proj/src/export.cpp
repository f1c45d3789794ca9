#include "lidarshape/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace lidarshape {
namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

}  // namespace

std::string format_number(double v) {
    if (v == 0) v = 0;  // no "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_features_csv(const std::filesystem::path& path, std::span<const SDFeature> features) {
    auto out = open_out(path);
    out << "kind,bin_index,bin_lo,bin_hi,mass\n";
    for (const auto& f : features) {
        const auto& h = f.histogram;
        for (Eigen::Index k = 0; k < h.bins(); ++k)
            out << to_string(f.kind) << ',' << k << ',' << format_number(h.edge(k)) << ','
                << format_number(h.edge(k + 1)) << ',' << format_number(h[k]) << '\n';
    }
    finish(out, path);
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m, const std::vector<std::string>& labels) {
    auto out = open_out(path);
    if (!labels.empty()) {
        for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? "," : "") << labels[i];
        out << '\n';
    }
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_number(m(r, c));
        out << '\n';
    }
    finish(out, path);
}

void write_stats_csv(const std::filesystem::path& path, const std::vector<GroupStats>& stats,
                     const std::vector<DistanceMatrix>& matrices) {
    if (stats.size() != matrices.size()) throw InvalidInput("write_stats_csv: stats and matrices differ in count");
    auto out = open_out(path);
    out << "category,within_mean,within_var,across_mean,across_var,ratio,strategy,mode\n";
    for (std::size_t i = 0; i < stats.size(); ++i)
        for (const auto& c : stats[i].categories)
            out << c.category << ',' << opt(c.within_mean) << ',' << opt(c.within_var) << ',' << opt(c.across_mean)
                << ',' << opt(c.across_var) << ',' << opt(c.ratio) << ',' << to_string(matrices[i].strategy) << ','
                << to_string(matrices[i].mode) << '\n';
    finish(out, path);
}

void write_transforms_csv(const std::filesystem::path& path, const GroupAlignment& alignment) {
    auto out = open_out(path);
    out << "object_id,tx,ty,tz,theta\n";
    for (std::size_t i = 0; i < alignment.transforms.size(); ++i) {
        const auto& t = alignment.transforms[i];
        out << i << ',' << format_number(t.tx) << ',' << format_number(t.ty) << ',' << format_number(t.tz) << ','
            << format_number(t.theta) << '\n';
    }
    finish(out, path);
}

void write_merge_log_csv(const std::filesystem::path& path, const GroupAlignment& alignment) {
    auto out = open_out(path);
    out << "step,target_object,source_object,distance,icp_rms,moved\n";
    for (std::size_t i = 0; i < alignment.merges.size(); ++i) {
        const auto& m = alignment.merges[i];
        out << i << ',' << m.target_object << ',' << m.source_object << ',' << format_number(m.distance) << ','
            << format_number(m.icp_rms) << ',';
        for (std::size_t k = 0; k < m.moved.size(); ++k) out << (k ? ";" : "") << m.moved[k];
        out << '\n';
    }
    finish(out, path);
}

void write_roi_csv(const std::filesystem::path& path, const TileGrid& grid, const std::vector<TileFeature>& features,
                   const std::vector<RoiRow>& rows) {
    auto out = open_out(path);
    out << "tile_x,tile_y,center_x,center_y,point_count,max_height,kept_by_stage\n";
    for (const auto& r : rows) {
        const auto c = grid.tile_center(r.tile);
        const auto& f = features.at(r.tile);
        out << grid.tile_x(r.tile) << ',' << grid.tile_y(r.tile) << ',' << format_number(c.x()) << ','
            << format_number(c.y()) << ',' << f.point_count << ',' << format_number(f.max_height) << ','
            << (r.refined ? "refine" : "basic") << '\n';
    }
    finish(out, path);
}

void write_pgm(const std::filesystem::path& path,
               const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& pixels) {
    auto out = open_out(path, true);
    out << "P5\n" << pixels.cols() << ' ' << pixels.rows() << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    finish(out, path);
}

Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> heatmap(const Eigen::MatrixXd& values) {
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> px(values.rows(), values.cols());
    if (values.size() == 0) return px;
    const double lo = values.minCoeff(), hi = values.maxCoeff();
    const double span = hi - lo;
    for (Eigen::Index r = 0; r < values.rows(); ++r)
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            const double t = span > 0 ? (values(r, c) - lo) / span : 0.0;
            px(r, c) = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - t)));
        }
    return px;
}

Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> spin_image_pixels(const SpinImage& img) {
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> px(kSpinRows, kSpinCols);
    const double hi = img.grid.maxCoeff();
    for (int r = 0; r < kSpinRows; ++r)
        for (int c = 0; c < kSpinCols; ++c)
            px(r, c) = static_cast<std::uint8_t>(hi > 0 ? std::lround(255.0 * img.grid(r, c) / hi) : 0);
    return px;
}

}  // namespace lidarshape
