#pragma once

#include "lidarshape/alignment.hpp"
#include "lidarshape/eval.hpp"
#include "lidarshape/octree.hpp"
#include "lidarshape/roi.hpp"
#include "lidarshape/shape_distribution.hpp"
#include "lidarshape/spin_image.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace lidarshape::cli {

/// Fixed per-stage offsets added to the run seed.
enum class Stage : std::uint64_t { Features = 1000, Eval = 2000, Spin = 3000, Synth = 4000 };

/// Every tunable of a run. Loaded from "key = value" text; see
/// RunConfig::describe for the key list and defaults.
struct RunConfig {
    std::uint64_t seed = 0;
    unsigned threads = 1;

    OctreeConfig octree;
    int sd_bins = 64;
    std::size_t sd_sample_budget = 200'000;
    int hsd_level = 3;
    FeatureMode mode = FeatureMode::Hsd;

    std::string strategy = "all";  ///< average, smallest, biggest or all
    HistogramMetric metric = HistogramMetric::Emd;

    ICPConfig icp;

    double tile_size = 1.0;
    BasicFilter basic;
    ClassModel::Mode roi_mode = ClassModel::Mode::Threshold;
    double roi_tau = 2.0;
    std::size_t roi_k = 10;

    AxisMode spin_axis = AxisMode::GlobalZ;
    double spin_radius = 0;  ///< 0: half the bounding-box diagonal
    CodebookKind codebook = CodebookKind::WholeImage;
    int parts = 5;

    std::uint64_t stage_seed(Stage s) const { return seed + static_cast<std::uint64_t>(s); }
    SDConfig sd_config(Stage s) const;
    EvalConfig eval_config() const;

    /// Sets one key; throws InvalidInput for unknown keys or bad values.
    void set(std::string_view key, std::string_view value);
    /// Applies a config file; errors carry the line number.
    void load(const std::filesystem::path& path);
    /// One "key = value" line per key, current values.
    void dump(std::ostream& out) const;
    /// Key names with a one-line description each.
    static std::string describe();
};

}  // namespace lidarshape::cli
