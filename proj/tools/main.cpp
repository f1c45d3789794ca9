#include "commands.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace lidarshape;
using namespace lidarshape::cli;

namespace {

constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& sets) {
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InvalidInput("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shape analysis of object point clouds from street-level scans"};
    app.fallthrough();
    app.footer("Config keys:\n" + RunConfig::describe());

    std::optional<fs::path> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::vector<std::string> sets;
    bool print_config = false;
    app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "run seed");
    app.add_option("--threads", threads, "worker cap, 0 = all cores");
    app.add_option("--set", sets, "override one config key, key=value")->take_all();
    app.add_flag("--print-config", print_config, "print the effective config and exit");

    FeaturesOptions features;
    auto* c_features = app.add_subcommand("features", "shape distributions of clouds or a manifest");
    c_features->add_option("inputs", features.inputs, "clouds, or one .csv manifest")->required();
    c_features->add_option("-o,--out", features.out_dir, "output directory")->required();

    RoiOptions roi;
    auto* c_roi = app.add_subcommand("roi", "candidate tiles of a scene");
    c_roi->add_option("scene", roi.scene, "scene cloud")->required()->check(CLI::ExistingFile);
    c_roi->add_option("-o,--out", roi.out_dir, "output directory")->required();
    c_roi->add_option("--positives", roi.positives, "tile_x,tile_y[,category] training tiles")
        ->check(CLI::ExistingFile);
    c_roi->add_option("--category", roi.category, "only train on positives of this category");

    AlignOptions align;
    bool no_merged = false;
    auto* c_align = app.add_subcommand("align", "align a group of objects into one frame");
    c_align->add_option("manifest", align.manifest, "file_path,category manifest")->required();
    c_align->add_option("-o,--out", align.out_dir, "output directory")->required();
    c_align->add_flag("--no-merged", no_merged, "skip writing merged.xyz");

    EvalOptions eval;
    auto* c_eval = app.add_subcommand("eval", "distance matrices and group statistics");
    c_eval->add_option("manifest", eval.manifest, "file_path,category manifest")->required();
    c_eval->add_option("-o,--out", eval.out_dir, "output directory")->required();
    c_eval->add_option("--modes", eval.modes, "exact, hsd or both")
        ->check(CLI::IsMember({"exact", "hsd", "both"}))
        ->capture_default_str();

    SpinOptions spin;
    auto* c_spin = app.add_subcommand("spin", "spin images, codebook coding and part labels");
    c_spin->add_option("cloud", spin.cloud, "object cloud")->required();
    c_spin->add_option("-o,--out", spin.out_dir, "output directory")->required();
    auto* o_train = c_spin->add_flag("--train", spin.train, "train a codebook on this cloud");
    c_spin->add_option("--codebook", spin.codebook, "codebook CSV to encode with")->excludes(o_train);
    c_spin->add_option("--pgm-count", spin.pgm_count, "spin images written as PGM")->capture_default_str();

    auto* c_synth = app.add_subcommand("synth", "synthetic data");
    c_synth->require_subcommand(1);
    SynthObjectsOptions objects;
    auto* c_objects = c_synth->add_subcommand("objects", "labeled objects plus manifest.csv");
    c_objects->add_option("-o,--out", objects.out_dir, "output directory")->required();
    c_objects->add_option("--shapes", objects.shapes, "sphere cylinder box pole car solid-box")->take_all();
    c_objects->add_option("--per-class", objects.per_class)->capture_default_str();
    c_objects->add_option("--points", objects.params.points)->capture_default_str();
    c_objects->add_option("--jitter", objects.params.size_jitter)->capture_default_str();
    c_objects->add_option("--noise", objects.params.noise)->capture_default_str();
    SynthSceneOptions scene;
    auto* c_scene = c_synth->add_subcommand("scene", "ground scene with planted objects");
    c_scene->add_option("-o,--out", scene.out_dir, "output directory")->required();
    c_scene->add_option("--tiles-x", scene.params.tiles_x)->capture_default_str();
    c_scene->add_option("--tiles-y", scene.params.tiles_y)->capture_default_str();
    c_scene->add_option("--poles", scene.params.poles)->capture_default_str();
    c_scene->add_option("--cars", scene.params.cars)->capture_default_str();
    c_scene->add_option("--bins", scene.params.bins)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        RunConfig cfg;
        if (config_path) cfg.load(*config_path);
        apply_overrides(cfg, sets);
        if (seed) cfg.seed = *seed;
        if (threads) cfg.threads = *threads;
        if (print_config) {
            cfg.dump(std::cout);
            return 0;
        }
        align.merged = !no_merged;

        if (c_features->parsed())
            cmd_features(features, cfg);
        else if (c_roi->parsed())
            cmd_roi(roi, cfg);
        else if (c_align->parsed())
            cmd_align(align, cfg);
        else if (c_eval->parsed())
            cmd_eval(eval, cfg);
        else if (c_spin->parsed())
            cmd_spin(spin, cfg);
        else if (c_objects->parsed())
            cmd_synth_objects(objects, cfg);
        else if (c_scene->parsed())
            cmd_synth_scene(scene, cfg);
        else {
            std::cerr << app.help();
            return kExitUsage;
        }
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return 0;
}
