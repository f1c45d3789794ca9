#pragma once

#include "lidarshape/types.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace lidarshape {

/// Synthetic stand-ins for street objects. Points are sampled uniformly
/// over the surface area (SolidBox: over the volume).
enum class SynthShape { Sphere, Cylinder, Box, Pole, Car, SolidBox };
std::string_view to_string(SynthShape s);
SynthShape parse_synth_shape(std::string_view name);

struct SynthObjectParams {
    std::size_t points = 300;
    double size_jitter = 0.1;  ///< relative, uniform in [1 - j, 1 + j] per dimension
    double noise = 0.01;       ///< isotropic Gaussian sigma, meters
};

/// One object resting on z = 0, centred on the z axis. Label = shape name.
PointCloud make_object(SynthShape shape, const SynthObjectParams& params, std::uint64_t seed);

struct LabeledDataset {
    std::vector<PointCloud> objects;  ///< label holds the category
    std::vector<std::string> categories;

    void validate() const;
};

LabeledDataset make_dataset(const std::vector<SynthShape>& classes, std::size_t per_class,
                            const SynthObjectParams& params, std::uint64_t seed);

struct PlantedObject {
    std::string category;
    Eigen::Vector2d footprint_min;  ///< tile-aligned footprint block
    Eigen::Vector2d footprint_max;
};

struct SynthScene {
    PointCloud cloud;
    std::vector<PlantedObject> planted;
    double tile_size = 1.0;
};

struct SceneParams {
    int tiles_x = 40;
    int tiles_y = 40;
    double ground_density = 40;   ///< points per m^2
    double object_density = 100;  ///< points per m^2 of object surface
    int poles = 6;
    int cars = 4;
    int bins = 4;  ///< garbage-can sized boxes
};

/// Flat noisy ground with upright objects on tile-aligned footprints. The
/// scene's min corner is pinned to (0, 0) so tile edges are integers.
SynthScene make_scene(const SceneParams& params, std::uint64_t seed);

}  // namespace lidarshape
