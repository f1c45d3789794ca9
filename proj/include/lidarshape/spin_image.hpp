#pragma once

#include "lidarshape/kdtree.hpp"
#include "lidarshape/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace lidarshape {

inline constexpr int kSpinRows = 31;  ///< beta axis, [-R, R]
inline constexpr int kSpinCols = 16;  ///< alpha axis, [0, R]
inline constexpr int kSpinDims = kSpinRows * kSpinCols;
inline constexpr int kPatchSide = 11;
inline constexpr int kPatchDims = kPatchSide * kPatchSide;
inline constexpr int kCodebookSize = 30;

using SpinGrid = Eigen::Matrix<double, kSpinRows, kSpinCols, Eigen::RowMajor>;

struct SpinImage {
    SpinGrid grid = SpinGrid::Zero();
    double support_radius = 0;
    bool empty = true;  ///< no neighbours within the support radius

    /// Row-major flattening, 496 values.
    Eigen::VectorXd vectorized() const;
};

enum class AxisMode { GlobalZ, LocalNormal };
AxisMode parse_axis_mode(std::string_view name);

/// Half the bounding-box diagonal.
double default_support_radius(const PointCloud& cloud);

/// Spin images over one cloud, sharing the neighbour index and (for
/// LocalNormal) the per-point normals.
class SpinImageGenerator {
public:
    SpinImageGenerator(const PointCloud& cloud, AxisMode mode, double support_radius);

    SpinImage at(std::size_t index) const;
    std::vector<SpinImage> all() const;

    const Eigen::Vector3d& axis(std::size_t index) const;

private:
    Eigen::Matrix3Xd points_;
    AxisMode mode_;
    double radius_;
    KdTree tree_;
    std::vector<Eigen::Vector3d> normals_;
};

/// Alpha: distance from the spin axis through the point; beta: signed
/// height along the axis. Neighbours vote bilinearly; unit mass.
SpinImage spin_image_at(const PointCloud& cloud, std::size_t index, AxisMode mode, double support_radius);

enum class CodebookKind { Patch11x11, WholeImage };
std::string_view to_string(CodebookKind kind);
CodebookKind parse_codebook_kind(std::string_view name);
constexpr int codebook_dims(CodebookKind kind) { return kind == CodebookKind::WholeImage ? kSpinDims : kPatchDims; }

struct Codebook {
    CodebookKind kind = CodebookKind::WholeImage;
    Eigen::VectorXd mean;
    Eigen::MatrixXd basis;        ///< dims x 30, orthonormal columns, descending eigenvalue
    Eigen::VectorXd eigenvalues;  ///< full spectrum, descending; empty when loaded from file

    int dims() const { return static_cast<int>(mean.size()); }
    int count() const { return static_cast<int>(basis.cols()); }
};

/// Principal components of row samples: population covariance, top
/// `count` eigenvectors.
struct PcaResult {
    Eigen::VectorXd mean;
    Eigen::MatrixXd basis;
    Eigen::VectorXd eigenvalues;
};
PcaResult pca(const Eigen::MatrixXd& samples, int count);

/// The 11x11 zero-padded patch centred on (row, col), row-major.
Eigen::VectorXd extract_patch(const SpinGrid& grid, int row, int col);

Codebook train_codebook(const std::vector<SpinImage>& images, CodebookKind kind);

struct PointCode {
    Eigen::VectorXd coeffs;
};

/// Whole image: basis^T (vec(img) - mean). Patch: per-pixel patch codes
/// mean-pooled over the 496 pixels.
PointCode encode(const SpinImage& img, const Codebook& cb);

/// mean + basis * code.
Eigen::VectorXd reconstruct(const PointCode& code, const Codebook& cb);

struct PartLabeling {
    std::vector<int> labels;
    int k = 0;
    std::vector<double> objective_history;  ///< within-cluster SS after each assignment step
    int iterations = 0;
};

/// k-means with k-means++ seeding, at most 100 iterations, stops when
/// assignments no longer change.
PartLabeling cluster_parts(const std::vector<PointCode>& codes, int k, std::uint64_t seed);

void write_codebook(const Codebook& cb, const std::filesystem::path& path);
Codebook read_codebook(const std::filesystem::path& path);

}  // namespace lidarshape
