#include "lidarshape/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace lidarshape {
namespace {

using Rng = std::mt19937_64;

struct Patch {
    double area;
    std::function<Point3(Rng&)> sample;
};

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Axis-aligned box faces; `skip_bottom` drops the z = lo face.
void add_box(std::vector<Patch>& patches, const Point3& lo, const Point3& hi, bool skip_bottom = false) {
    const Point3 e = hi - lo;
    for (int axis = 0; axis < 3; ++axis) {
        const int u = (axis + 1) % 3, v = (axis + 2) % 3;
        for (int side = 0; side < 2; ++side) {
            if (skip_bottom && axis == 2 && side == 0) continue;
            const double fixed = side ? hi[axis] : lo[axis];
            patches.push_back({e[u] * e[v], [=](Rng& rng) {
                                   Point3 p;
                                   p[axis] = fixed;
                                   p[u] = uniform(rng, lo[u], hi[u]);
                                   p[v] = uniform(rng, lo[v], hi[v]);
                                   return p;
                               }});
        }
    }
}

void add_cylinder(std::vector<Patch>& patches, double radius, double z0, double z1, bool bottom, bool top) {
    constexpr double two_pi = 2 * std::numbers::pi;
    patches.push_back({two_pi * radius * (z1 - z0), [=](Rng& rng) {
                           const double a = uniform(rng, 0, two_pi);
                           return Point3(radius * std::cos(a), radius * std::sin(a), uniform(rng, z0, z1));
                       }});
    auto cap = [=](double z) {
        return Patch{std::numbers::pi * radius * radius, [=](Rng& rng) {
                         const double a = uniform(rng, 0, two_pi);
                         const double r = radius * std::sqrt(uniform(rng, 0, 1));
                         return Point3(r * std::cos(a), r * std::sin(a), z);
                     }};
    };
    if (bottom) patches.push_back(cap(z0));
    if (top) patches.push_back(cap(z1));
}

PointCloud sample_patches(const std::vector<Patch>& patches, std::size_t n, double noise, Rng& rng) {
    std::vector<double> areas;
    for (const auto& p : patches) areas.push_back(p.area);
    std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());
    std::normal_distribution<double> gauss(0.0, 1.0);
    PointCloud cloud;
    cloud.points.resize(3, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        Point3 p = patches[pick(rng)].sample(rng);
        if (noise > 0) p += noise * Point3(gauss(rng), gauss(rng), gauss(rng));
        cloud.points.col(static_cast<Eigen::Index>(i)) = p;
    }
    return cloud;
}

std::vector<Patch> shape_patches(SynthShape shape, Rng& rng, double jitter) {
    auto j = [&](double v) { return v * uniform(rng, 1 - jitter, 1 + jitter); };
    std::vector<Patch> patches;
    switch (shape) {
        case SynthShape::Sphere: {
            const double r = j(0.6);
            constexpr double four_pi = 4 * std::numbers::pi;
            patches.push_back({four_pi * r * r, [=](Rng& g) {
                                   std::normal_distribution<double> n(0.0, 1.0);
                                   Point3 d(n(g), n(g), n(g));
                                   while (d.norm() < 1e-12) d = Point3(n(g), n(g), n(g));
                                   return Point3(r * d.normalized() + Point3(0, 0, r));
                               }});
            break;
        }
        case SynthShape::Cylinder:
            add_cylinder(patches, j(0.4), 0.0, j(1.6), true, true);
            break;
        case SynthShape::Box: {
            const Point3 half(j(0.6), j(0.4), 0);
            add_box(patches, Point3(-half.x(), -half.y(), 0), Point3(half.x(), half.y(), j(1.0)));
            break;
        }
        case SynthShape::Pole:
            add_cylinder(patches, j(0.12), 0.0, j(5.0), false, true);
            break;
        case SynthShape::Car: {
            const double l = j(4.2), w = j(1.8), h = j(0.9);
            add_box(patches, Point3(-l / 2, -w / 2, 0), Point3(l / 2, w / 2, h), true);
            // Cabin set back from centre: breaks the front/back symmetry.
            const double cl = j(2.0), cw = 0.9 * w, ch = j(0.6);
            add_box(patches, Point3(-l / 2 + 0.3, -cw / 2, h), Point3(-l / 2 + 0.3 + cl, cw / 2, h + ch), true);
            break;
        }
        case SynthShape::SolidBox: {
            const double sx = j(1.0), sy = j(1.0), sz = j(1.0);
            patches.push_back({sx * sy * sz, [=](Rng& g) {
                                   return Point3(uniform(g, -sx / 2, sx / 2), uniform(g, -sy / 2, sy / 2),
                                                 uniform(g, 0, sz));
                               }});
            break;
        }
    }
    return patches;
}

}  // namespace

std::string_view to_string(SynthShape s) {
    switch (s) {
        case SynthShape::Sphere: return "sphere";
        case SynthShape::Cylinder: return "cylinder";
        case SynthShape::Box: return "box";
        case SynthShape::Pole: return "pole";
        case SynthShape::Car: return "car";
        case SynthShape::SolidBox: return "solid-box";
    }
    return "?";
}

SynthShape parse_synth_shape(std::string_view name) {
    for (auto s : {SynthShape::Sphere, SynthShape::Cylinder, SynthShape::Box, SynthShape::Pole, SynthShape::Car,
                   SynthShape::SolidBox})
        if (to_string(s) == name) return s;
    throw InvalidInput("unknown synthetic shape '" + std::string(name) + "'");
}

PointCloud make_object(SynthShape shape, const SynthObjectParams& params, std::uint64_t seed) {
    if (params.points == 0) throw InvalidInput("make_object: point count must be positive");
    Rng rng(seed);
    const auto patches = shape_patches(shape, rng, params.size_jitter);
    PointCloud cloud = sample_patches(patches, params.points, params.noise, rng);
    cloud.label = std::string(to_string(shape));
    return cloud;
}

void LabeledDataset::validate() const {
    for (const auto& o : objects) {
        if (o.empty()) throw InvalidInput("dataset contains an empty object");
        if (std::find(categories.begin(), categories.end(), o.label) == categories.end())
            throw InvalidInput("object category '" + o.label + "' not in the category list");
    }
}

LabeledDataset make_dataset(const std::vector<SynthShape>& classes, std::size_t per_class,
                            const SynthObjectParams& params, std::uint64_t seed) {
    LabeledDataset ds;
    std::uint64_t k = 0;
    for (auto shape : classes) {
        ds.categories.emplace_back(to_string(shape));
        for (std::size_t i = 0; i < per_class; ++i) ds.objects.push_back(make_object(shape, params, seed + 7919 * ++k));
    }
    return ds;
}

SynthScene make_scene(const SceneParams& params, std::uint64_t seed) {
    Rng rng(seed);
    SynthScene scene;
    const double w = params.tiles_x, h = params.tiles_y;
    std::vector<Point3> pts;
    std::normal_distribution<double> ground_noise(0.0, 0.02);
    const auto ground_n = static_cast<std::size_t>(params.ground_density * w * h);
    pts.emplace_back(0, 0, 0);  // pins the grid origin
    for (std::size_t i = 1; i < ground_n; ++i) pts.emplace_back(uniform(rng, 0, w), uniform(rng, 0, h), ground_noise(rng));

    // Footprint blocks in tile units, kept one tile apart from each other
    // and from the border.
    std::vector<std::pair<Eigen::Vector2i, Eigen::Vector2i>> used;
    auto place = [&](int fx, int fy) -> Eigen::Vector2i {
        for (int attempt = 0; attempt < 10000; ++attempt) {
            const Eigen::Vector2i lo(std::uniform_int_distribution<int>(1, params.tiles_x - fx - 1)(rng),
                                     std::uniform_int_distribution<int>(1, params.tiles_y - fy - 1)(rng));
            const Eigen::Vector2i hi = lo + Eigen::Vector2i(fx, fy);
            bool clash = false;
            for (const auto& [ulo, uhi] : used)
                clash = clash || !(hi.x() + 1 <= ulo.x() || uhi.x() + 1 <= lo.x() || hi.y() + 1 <= ulo.y() ||
                                   uhi.y() + 1 <= lo.y());
            if (!clash) {
                used.emplace_back(lo, hi);
                return lo;
            }
        }
        throw InvalidInput("make_scene: scene too small for the requested objects");
    };

    auto plant = [&](const std::string& category, int fx, int fy, std::vector<Patch> patches, double inset) {
        const Eigen::Vector2i lo = place(fx, fy);
        const Eigen::Vector2d centre = lo.cast<double>() + 0.5 * Eigen::Vector2d(fx, fy);
        double area = 0;
        for (const auto& p : patches) area += p.area;
        const auto n = static_cast<std::size_t>(std::ceil(area * params.object_density));
        const PointCloud obj = sample_patches(patches, n, 0.005, rng);
        for (Eigen::Index i = 0; i < obj.points.cols(); ++i) {
            Point3 p = obj.points.col(i);
            p.head<2>() += centre;
            // Keep noisy samples inside the footprint block.
            p.x() = std::clamp(p.x(), lo.x() + inset, lo.x() + fx - inset);
            p.y() = std::clamp(p.y(), lo.y() + inset, lo.y() + fy - inset);
            pts.push_back(p);
        }
        scene.planted.push_back({category, lo.cast<double>(), (lo + Eigen::Vector2i(fx, fy)).cast<double>()});
    };

    constexpr double inset = 0.02;
    for (int i = 0; i < params.poles; ++i) {
        std::vector<Patch> patches;
        add_cylinder(patches, uniform(rng, 0.1, 0.2), 0.0, uniform(rng, 4.0, 6.0), false, true);
        plant("pole", 1, 1, std::move(patches), inset);
    }
    for (int i = 0; i < params.cars; ++i) {
        std::vector<Patch> patches;
        const double ch = uniform(rng, 1.3, 1.7);
        add_box(patches, Point3(-1.9, -0.9, 0), Point3(1.9, 0.9, ch), true);
        plant("car", 4, 2, std::move(patches), inset);
    }
    for (int i = 0; i < params.bins; ++i) {
        std::vector<Patch> patches;
        const double s = uniform(rng, 0.25, 0.4);
        add_box(patches, Point3(-s, -s, 0), Point3(s, s, uniform(rng, 0.8, 1.2)), true);
        plant("bin", 1, 1, std::move(patches), inset);
    }

    scene.cloud.points.resize(3, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) scene.cloud.points.col(static_cast<Eigen::Index>(i)) = pts[i];
    return scene;
}

}  // namespace lidarshape
