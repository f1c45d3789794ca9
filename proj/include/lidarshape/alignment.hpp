#pragma once

#include "lidarshape/histogram.hpp"
#include "lidarshape/shape_distribution.hpp"
#include "lidarshape/transform.hpp"
#include "lidarshape/types.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace lidarshape {

/// The five 4-DOF invariant shape histograms used for object similarity.
enum class ShapeFeature {
    Height = 0,         ///< z - min z
    Radial = 1,         ///< horizontal distance from the vertical centroid axis
    PairDistance = 2,   ///< D2 sample histogram
    Thickness = 3,      ///< per z-slab horizontal RMS spread, mass-weighted by thickness
    PlaneDistance = 4,  ///< distance to the best-fit vertical plane
};
inline constexpr int kShapeFeatureCount = 5;
std::string_view to_string(ShapeFeature f);

struct FeatureRanges {
    std::array<std::pair<double, double>, kShapeFeatureCount> range{};

    bool operator==(const FeatureRanges&) const = default;
};

struct ShapeFeatureSet {
    FeatureRanges ranges;
    std::array<Histogram1D, kShapeFeatureCount> features;

    const Histogram1D& operator[](ShapeFeature f) const { return features[static_cast<int>(f)]; }
};

/// Per-feature upper bounds over a group, so every object shares binning.
FeatureRanges feature_ranges(const std::vector<PointCloud>& objects);

ShapeFeatureSet shape_features(const PointCloud& cloud, const FeatureRanges& ranges, const SDConfig& cfg = {});

/// Mean of the five per-feature EMDs.
double object_distance(const ShapeFeatureSet& a, const ShapeFeatureSet& b);

/// Symmetric, zero diagonal.
using SimilarityMatrix = Eigen::MatrixXd;

SimilarityMatrix similarity_matrix(const std::vector<PointCloud>& objects, const SDConfig& cfg = {});

struct ICPConfig {
    int max_iters = 50;
    std::optional<double> rms_tol;  ///< nullopt: 1e-5 * target diameter
    double trim_fraction = 0.1;

    void validate() const;
};

struct ICPResult {
    Transform4DOF transform;
    double final_rms = 0;
    int iterations = 0;
    std::vector<double> rms_history;  ///< trimmed RMS after each correspondence pass
};

/// Least-squares 4-DOF motion taking src columns onto dst columns: 2-D
/// Procrustes on centred xy, then translation from centroids.
Transform4DOF solve_4dof(const Eigen::Matrix3Xd& src, const Eigen::Matrix3Xd& dst);

/// Trimmed point-to-point ICP restricted to rotation about z plus translation.
ICPResult icp_4dof(const PointCloud& source, const PointCloud& target, const ICPConfig& cfg = {});

struct MergeRecord {
    std::size_t target_object = 0;  ///< member of the surviving set used as ICP target
    std::size_t source_object = 0;  ///< member of the merged-in set used as ICP source
    std::vector<std::size_t> moved;  ///< every object re-framed by this merge
    double distance = 0;
    double icp_rms = 0;
    Transform4DOF step;
};

struct GroupAlignment {
    std::vector<Transform4DOF> transforms;  ///< object frame -> common frame
    std::vector<MergeRecord> merges;
};

/// Thrown when a pairwise ICP fails mid-merge; carries the log so far.
class AlignmentAborted : public NumericalError {
public:
    AlignmentAborted(const std::string& what, GroupAlignment partial)
        : NumericalError(what), partial_(std::move(partial)) {}
    const GroupAlignment& partial() const { return partial_; }

private:
    GroupAlignment partial_;
};

/// Agglomerative single-linkage merging over a static similarity matrix.
/// Each merge aligns the closest cross-set pair and re-frames the smaller set.
GroupAlignment align_group(const std::vector<PointCloud>& objects, const SimilarityMatrix& similarity,
                           const ICPConfig& cfg = {});
GroupAlignment align_group(const std::vector<PointCloud>& objects, const ICPConfig& cfg = {},
                           const SDConfig& sd_cfg = {});

}  // namespace lidarshape
