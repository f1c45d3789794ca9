#pragma once

#include "lidarshape/alignment.hpp"
#include "lidarshape/eval.hpp"
#include "lidarshape/roi.hpp"
#include "lidarshape/shape_distribution.hpp"
#include "lidarshape/spin_image.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lidarshape {

/// Fixed-width number formatting shared by every CSV writer (%.12g).
std::string format_number(double v);

/// kind,bin_index,bin_lo,bin_hi,mass
void write_features_csv(const std::filesystem::path& path, std::span<const SDFeature> features);

/// Header row of labels (if given) then one row per matrix row.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& labels = {});

/// category,within_mean,within_var,across_mean,across_var,ratio,strategy,mode; NA for undefined.
void write_stats_csv(const std::filesystem::path& path, const std::vector<GroupStats>& stats,
                     const std::vector<DistanceMatrix>& matrices);

/// object_id,tx,ty,tz,theta
void write_transforms_csv(const std::filesystem::path& path, const GroupAlignment& alignment);

/// step,target_object,source_object,distance,icp_rms,moved
void write_merge_log_csv(const std::filesystem::path& path, const GroupAlignment& alignment);

struct RoiRow {
    std::size_t tile = 0;
    bool refined = false;
};

/// tile_x,tile_y,center_x,center_y,point_count,max_height,kept_by_stage
void write_roi_csv(const std::filesystem::path& path, const TileGrid& grid, const std::vector<TileFeature>& features,
                   const std::vector<RoiRow>& rows);

/// Binary 8-bit PGM (P5), row-major.
void write_pgm(const std::filesystem::path& path,
               const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& pixels);

/// Linear gray mapping: min -> white, max -> black.
Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> heatmap(const Eigen::MatrixXd& values);

/// Linear gray mapping for spin images: 0 -> black, max -> white.
Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> spin_image_pixels(const SpinImage& img);

}  // namespace lidarshape
