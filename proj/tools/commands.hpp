#pragma once

#include "run_config.hpp"

#include "lidarshape/synth.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lidarshape::cli {

namespace fs = std::filesystem;

/// Objects listed in a "file_path,category" CSV. Relative paths resolve
/// against the manifest's directory; categories keep first-seen order.
LabeledDataset read_manifest(const fs::path& manifest);
void write_manifest(const fs::path& manifest, const std::vector<std::string>& files,
                    const std::vector<std::string>& categories);

struct FeaturesOptions {
    std::vector<fs::path> inputs;  ///< clouds, or a single .csv manifest
    fs::path out_dir;
};
void cmd_features(const FeaturesOptions& opt, const RunConfig& cfg);

struct RoiOptions {
    fs::path scene;
    fs::path out_dir;
    std::optional<fs::path> positives;  ///< tile_x,tile_y[,category] CSV of training tiles
    std::string category;               ///< restrict positives to this category when set
};
void cmd_roi(const RoiOptions& opt, const RunConfig& cfg);

struct AlignOptions {
    fs::path manifest;
    fs::path out_dir;
    bool merged = true;
};
void cmd_align(const AlignOptions& opt, const RunConfig& cfg);

struct EvalOptions {
    fs::path manifest;
    fs::path out_dir;
    std::string modes = "both";  ///< exact, hsd or both
};
void cmd_eval(const EvalOptions& opt, const RunConfig& cfg);

struct SpinOptions {
    fs::path cloud;
    fs::path out_dir;
    std::optional<fs::path> codebook;
    bool train = false;
    std::size_t pgm_count = 3;
};
void cmd_spin(const SpinOptions& opt, const RunConfig& cfg);

struct SynthObjectsOptions {
    std::vector<std::string> shapes{"sphere", "cylinder", "box"};
    std::size_t per_class = 30;
    SynthObjectParams params;
    fs::path out_dir;
};
void cmd_synth_objects(const SynthObjectsOptions& opt, const RunConfig& cfg);

struct SynthSceneOptions {
    SceneParams params;
    fs::path out_dir;
};
void cmd_synth_scene(const SynthSceneOptions& opt, const RunConfig& cfg);

}  // namespace lidarshape::cli
