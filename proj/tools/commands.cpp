#include "commands.hpp"

#include "lidarshape/cloud_io.hpp"
#include "lidarshape/export.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace lidarshape::cli {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(field.begin());
        out.push_back(field);
    }
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

std::ofstream open_text(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

bool is_manifest(const fs::path& p) { return p.extension() == ".csv"; }

int parse_int(const std::string& s, std::size_t line) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("expected an integer, got '" + s + "'", line);
    return v;
}

std::vector<std::string> object_names(const LabeledDataset& ds) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < ds.objects.size(); ++i) names.push_back(std::to_string(i));
    return names;
}

}  // namespace

LabeledDataset read_manifest(const fs::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw IoError("cannot open manifest '" + manifest.string() + "'");
    LabeledDataset ds;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto f = split_csv(line);
        if (n == 1 && f.size() == 2 && f[0] == "file_path" && f[1] == "category") continue;
        if (f.size() != 2 || f[0].empty() || f[1].empty())
            throw ParseError("manifest rows are 'file_path,category'", n);
        fs::path p = f[0];
        if (p.is_relative()) p = manifest.parent_path() / p;
        PointCloud cloud = load_cloud(p, format_from_extension(p));
        cloud.label = f[1];
        if (std::find(ds.categories.begin(), ds.categories.end(), f[1]) == ds.categories.end())
            ds.categories.push_back(f[1]);
        ds.objects.push_back(std::move(cloud));
    }
    if (ds.objects.empty()) throw InvalidInput("manifest '" + manifest.string() + "' lists no objects");
    return ds;
}

void write_manifest(const fs::path& manifest, const std::vector<std::string>& files,
                    const std::vector<std::string>& categories) {
    auto out = open_text(manifest);
    out << "file_path,category\n";
    for (std::size_t i = 0; i < files.size(); ++i) out << files[i] << ',' << categories[i] << '\n';
    if (!out) throw IoError("write failed for '" + manifest.string() + "'");
}

void cmd_features(const FeaturesOptions& opt, const RunConfig& cfg) {
    if (opt.inputs.empty()) throw InvalidInput("features: no input given");
    LabeledDataset ds;
    std::vector<std::string> stems;
    if (opt.inputs.size() == 1 && is_manifest(opt.inputs[0])) {
        ds = read_manifest(opt.inputs[0]);
        for (std::size_t i = 0; i < ds.objects.size(); ++i) stems.push_back(std::to_string(i) + "_" + ds.objects[i].label);
    } else {
        ds.categories = {"input"};
        for (const auto& p : opt.inputs) {
            ds.objects.push_back(load_cloud(p, format_from_extension(p)));
            ds.objects.back().label = "input";
            stems.push_back(p.stem().string());
        }
    }
    ensure_dir(opt.out_dir);
    EvalConfig ec = cfg.eval_config();
    ec.sd = cfg.sd_config(Stage::Features);
    const auto feats = dataset_features(ds, cfg.mode, ec, cfg.threads);
    for (std::size_t i = 0; i < feats.size(); ++i)
        write_features_csv(opt.out_dir / (stems[i] + "_features.csv"), feats[i]);
}

void cmd_roi(const RoiOptions& opt, const RunConfig& cfg) {
    const PointCloud scene = load_cloud(opt.scene, format_from_extension(opt.scene));
    const TileGrid grid = build_grid(scene, cfg.tile_size);
    const auto features = tile_features(grid, scene);
    const auto candidates = basic_filter(features, cfg.basic);

    std::set<std::size_t> refined;
    if (opt.positives) {
        std::ifstream in(*opt.positives);
        if (!in) throw IoError("cannot open positives '" + opt.positives->string() + "'");
        std::vector<TileFeature> train;
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            const auto f = split_csv(line);
            if (f.empty() || (n == 1 && f[0] == "tile_x")) continue;
            if (f.size() < 2) throw ParseError("positives rows are 'tile_x,tile_y[,category]'", n);
            if (!opt.category.empty() && (f.size() < 3 || f[2] != opt.category)) continue;
            const int tx = parse_int(f[0], n), ty = parse_int(f[1], n);
            if (tx < 0 || ty < 0 || tx >= grid.width || ty >= grid.height)
                throw InvalidInput("positive tile (" + f[0] + ", " + f[1] + ") lies outside the scene grid");
            train.push_back(features[grid.index(tx, ty)]);
        }
        if (train.empty()) throw InvalidInput("no positive tiles selected for training");
        ClassModel model = train_class_model(train, opt.category.empty() ? "positive" : opt.category);
        model.mode = cfg.roi_mode;
        model.tau = cfg.roi_tau;
        model.k = cfg.roi_k;
        const auto kept = refine_roi(candidates, features, model);
        refined.insert(kept.begin(), kept.end());
    }

    ensure_dir(opt.out_dir);
    std::vector<RoiRow> rows;
    for (auto t : candidates) rows.push_back({t, refined.count(t) > 0});
    write_roi_csv(opt.out_dir / "roi.csv", grid, features, rows);

    // Mask: north up; 0 empty, 64 occupied, 160 basic candidate, 255 refined.
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> mask(grid.height, grid.width);
    for (std::size_t t = 0; t < grid.tile_count(); ++t)
        mask(grid.height - 1 - grid.tile_y(t), grid.tile_x(t)) = features[t].point_count > 0 ? 64 : 0;
    for (const auto& r : rows)
        mask(grid.height - 1 - grid.tile_y(r.tile), grid.tile_x(r.tile)) = r.refined ? 255 : 160;
    write_pgm(opt.out_dir / "roi_mask.pgm", mask);
}

void cmd_align(const AlignOptions& opt, const RunConfig& cfg) {
    const LabeledDataset ds = read_manifest(opt.manifest);
    SDConfig sd = cfg.sd_config(Stage::Features);
    const SimilarityMatrix sim = similarity_matrix(ds.objects, sd);
    const GroupAlignment g = align_group(ds.objects, sim, cfg.icp);

    ensure_dir(opt.out_dir);
    write_matrix_csv(opt.out_dir / "similarity.csv", sim, object_names(ds));
    write_transforms_csv(opt.out_dir / "transforms.csv", g);
    write_merge_log_csv(opt.out_dir / "merge_log.csv", g);
    if (opt.merged) {
        Eigen::Index total = 0;
        for (const auto& o : ds.objects) total += o.points.cols();
        PointCloud merged;
        merged.points.resize(3, total);
        Eigen::Index at = 0;
        for (std::size_t i = 0; i < ds.objects.size(); ++i) {
            const auto moved = apply_transform(ds.objects[i], g.transforms[i]);
            merged.points.middleCols(at, moved.points.cols()) = moved.points;
            at += moved.points.cols();
        }
        save_cloud(merged, opt.out_dir / "merged.xyz");
    }
}

void cmd_eval(const EvalOptions& opt, const RunConfig& cfg) {
    const LabeledDataset ds = read_manifest(opt.manifest);
    if (ds.categories.size() < 2) throw InvalidInput("eval: manifest needs at least two categories");
    std::vector<FeatureMode> modes;
    if (opt.modes == "both")
        modes = {FeatureMode::Exact, FeatureMode::Hsd};
    else
        modes = {parse_feature_mode(opt.modes)};
    std::vector<Strategy> strategies;
    if (cfg.strategy == "all")
        strategies.assign(kAllStrategies.begin(), kAllStrategies.end());
    else
        strategies = {parse_strategy(cfg.strategy)};

    ensure_dir(opt.out_dir);
    const EvalConfig ec = cfg.eval_config();
    std::vector<GroupStats> stats;
    std::vector<DistanceMatrix> matrices;
    for (auto mode : modes) {
        const auto feats = dataset_features(ds, mode, ec, cfg.threads);
        for (auto s : strategies) {
            DistanceMatrix m = distance_matrix(ds, feats, s, mode, cfg.metric);
            const std::string tag = std::string(to_string(s)) + "_" + std::string(to_string(mode));
            std::vector<std::string> header;
            for (auto i : m.order) header.push_back(ds.objects[i].label + "#" + std::to_string(i));
            write_matrix_csv(opt.out_dir / ("matrix_" + tag + ".csv"), m.values, header);
            write_pgm(opt.out_dir / ("heatmap_" + tag + ".pgm"), heatmap(m.values));
            stats.push_back(group_stats(m, ds));
            matrices.push_back(std::move(m));
        }
    }
    write_stats_csv(opt.out_dir / "stats.csv", stats, matrices);
}

void cmd_spin(const SpinOptions& opt, const RunConfig& cfg) {
    if (opt.train == opt.codebook.has_value()) throw InvalidInput("spin: give exactly one of --train or --codebook");
    const PointCloud cloud = load_cloud(opt.cloud, format_from_extension(opt.cloud));
    const double radius = cfg.spin_radius > 0 ? cfg.spin_radius : default_support_radius(cloud);
    const SpinImageGenerator gen(cloud, cfg.spin_axis, radius);
    const auto images = gen.all();

    Codebook cb;
    if (opt.train) {
        cb = train_codebook(images, cfg.codebook);
    } else {
        cb = read_codebook(*opt.codebook);
    }

    std::vector<PointCode> codes;
    codes.reserve(images.size());
    for (const auto& img : images) codes.push_back(encode(img, cb));
    const auto parts = cluster_parts(codes, std::min<int>(cfg.parts, static_cast<int>(codes.size())),
                                     cfg.stage_seed(Stage::Spin));

    ensure_dir(opt.out_dir);
    if (opt.train) write_codebook(cb, opt.out_dir / "codebook.csv");
    {
        auto out = open_text(opt.out_dir / "codes.csv");
        out << "point_index";
        for (int k = 0; k < cb.count(); ++k) out << ",c" << k;
        out << '\n';
        for (std::size_t i = 0; i < codes.size(); ++i) {
            out << i;
            for (Eigen::Index k = 0; k < codes[i].coeffs.size(); ++k) out << ',' << format_number(codes[i].coeffs[k]);
            out << '\n';
        }
        if (!out) throw IoError("write failed for codes.csv");
    }
    {
        auto out = open_text(opt.out_dir / "labels.csv");
        out << "point_index,x,y,z,part\n";
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const auto p = cloud.point(i);
            out << i << ',' << format_number(p.x()) << ',' << format_number(p.y()) << ',' << format_number(p.z())
                << ',' << parts.labels[i] << '\n';
        }
        if (!out) throw IoError("write failed for labels.csv");
    }
    for (std::size_t i = 0; i < std::min(opt.pgm_count, images.size()); ++i)
        write_pgm(opt.out_dir / ("spin_" + std::to_string(i) + ".pgm"), spin_image_pixels(images[i]));
}

void cmd_synth_objects(const SynthObjectsOptions& opt, const RunConfig& cfg) {
    std::vector<SynthShape> shapes;
    for (const auto& s : opt.shapes) shapes.push_back(parse_synth_shape(s));
    if (shapes.empty() || opt.per_class == 0) throw InvalidInput("synth: need at least one shape and one object");
    const auto ds = make_dataset(shapes, opt.per_class, opt.params, cfg.stage_seed(Stage::Synth));
    ensure_dir(opt.out_dir);
    std::vector<std::string> files, cats;
    for (std::size_t i = 0; i < ds.objects.size(); ++i) {
        const std::string name = ds.objects[i].label + "_" + std::to_string(i) + ".xyz";
        save_cloud(ds.objects[i], opt.out_dir / name);
        files.push_back(name);
        cats.push_back(ds.objects[i].label);
    }
    write_manifest(opt.out_dir / "manifest.csv", files, cats);
}

void cmd_synth_scene(const SynthSceneOptions& opt, const RunConfig& cfg) {
    const auto scene = make_scene(opt.params, cfg.stage_seed(Stage::Synth));
    ensure_dir(opt.out_dir);
    save_cloud(scene.cloud, opt.out_dir / "scene.xyz");
    auto out = open_text(opt.out_dir / "planted_tiles.csv");
    out << "tile_x,tile_y,category\n";
    const double ts = scene.tile_size;
    for (const auto& p : scene.planted) {
        const Eigen::Vector2i lo = (p.footprint_min / ts).array().floor().cast<int>();
        const Eigen::Vector2i hi = (p.footprint_max / ts).array().ceil().cast<int>();
        for (int x = lo.x(); x < hi.x(); ++x)
            for (int y = lo.y(); y < hi.y(); ++y) out << x << ',' << y << ',' << p.category << '\n';
    }
    if (!out) throw IoError("write failed for planted_tiles.csv");
}

}  // namespace lidarshape::cli
