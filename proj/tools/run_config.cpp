#include "run_config.hpp"

#include "lidarshape/export.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace lidarshape::cli {
namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
    T v{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw InvalidInput("config key '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
    return v;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string_view axis_name(AxisMode m) { return m == AxisMode::GlobalZ ? "global-z" : "local-normal"; }
std::string_view roi_mode_name(ClassModel::Mode m) { return m == ClassModel::Mode::Threshold ? "threshold" : "knearest"; }

struct Key {
    const char* name;
    const char* help;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& keys() {
    using R = RunConfig;
    using std::string_view;
    static const std::vector<Key> table{
        {"seed", "run seed; stages add fixed offsets",
         [](R& c, string_view v) { c.seed = parse_number<std::uint64_t>("seed", v); },
         [](const R& c) { return std::to_string(c.seed); }},
        {"threads", "worker cap, 0 = all cores",
         [](R& c, string_view v) { c.threads = parse_number<unsigned>("threads", v); },
         [](const R& c) { return std::to_string(c.threads); }},
        {"octree.max_depth", "octree depth limit",
         [](R& c, string_view v) { c.octree.max_depth = parse_number<int>("octree.max_depth", v); },
         [](const R& c) { return std::to_string(c.octree.max_depth); }},
        {"octree.leaf_capacity", "points per leaf before splitting",
         [](R& c, string_view v) { c.octree.leaf_capacity = parse_number<int>("octree.leaf_capacity", v); },
         [](const R& c) { return std::to_string(c.octree.leaf_capacity); }},
        {"octree.reps_per_node", "representative points per node (m)",
         [](R& c, string_view v) { c.octree.reps_per_node = parse_number<int>("octree.reps_per_node", v); },
         [](const R& c) { return std::to_string(c.octree.reps_per_node); }},
        {"sd.bins", "histogram bins",
         [](R& c, string_view v) { c.sd_bins = parse_number<int>("sd.bins", v); },
         [](const R& c) { return std::to_string(c.sd_bins); }},
        {"sd.sample_budget", "max tuples before sampling",
         [](R& c, string_view v) { c.sd_sample_budget = parse_number<std::size_t>("sd.sample_budget", v); },
         [](const R& c) { return std::to_string(c.sd_sample_budget); }},
        {"hsd.level", "octree frontier depth for hsd",
         [](R& c, string_view v) { c.hsd_level = parse_number<int>("hsd.level", v); },
         [](const R& c) { return std::to_string(c.hsd_level); }},
        {"feature.mode", "exact or hsd",
         [](R& c, string_view v) { c.mode = parse_feature_mode(v); },
         [](const R& c) { return std::string(to_string(c.mode)); }},
        {"eval.strategy", "average, smallest, biggest or all",
         [](R& c, string_view v) {
             if (v != "all") parse_strategy(v);
             c.strategy = std::string(v);
         },
         [](const R& c) { return c.strategy; }},
        {"eval.metric", "emd or l1",
         [](R& c, string_view v) { c.metric = parse_histogram_metric(v); },
         [](const R& c) { return std::string(to_string(c.metric)); }},
        {"icp.max_iters", "ICP iteration cap",
         [](R& c, string_view v) { c.icp.max_iters = parse_number<int>("icp.max_iters", v); },
         [](const R& c) { return std::to_string(c.icp.max_iters); }},
        {"icp.rms_tol", "ICP tolerance in meters, auto = 1e-5 * target diameter",
         [](R& c, string_view v) {
             if (v == "auto")
                 c.icp.rms_tol.reset();
             else
                 c.icp.rms_tol = parse_number<double>("icp.rms_tol", v);
         },
         [](const R& c) { return c.icp.rms_tol ? format_number(*c.icp.rms_tol) : std::string("auto"); }},
        {"icp.trim_fraction", "share of worst correspondences dropped",
         [](R& c, string_view v) { c.icp.trim_fraction = parse_number<double>("icp.trim_fraction", v); },
         [](const R& c) { return format_number(c.icp.trim_fraction); }},
        {"roi.tile_size", "ground tile edge in meters",
         [](R& c, string_view v) { c.tile_size = parse_number<double>("roi.tile_size", v); },
         [](const R& c) { return format_number(c.tile_size); }},
        {"roi.min_points", "basic filter point minimum",
         [](R& c, string_view v) { c.basic.min_points = parse_number<std::size_t>("roi.min_points", v); },
         [](const R& c) { return std::to_string(c.basic.min_points); }},
        {"roi.height_lo", "basic filter lower max-height bound (m)",
         [](R& c, string_view v) { c.basic.height_lo = parse_number<double>("roi.height_lo", v); },
         [](const R& c) { return format_number(c.basic.height_lo); }},
        {"roi.height_hi", "basic filter upper max-height bound (m)",
         [](R& c, string_view v) { c.basic.height_hi = parse_number<double>("roi.height_hi", v); },
         [](const R& c) { return format_number(c.basic.height_hi); }},
        {"roi.mode", "threshold or knearest",
         [](R& c, string_view v) {
             if (v == "threshold")
                 c.roi_mode = ClassModel::Mode::Threshold;
             else if (v == "knearest")
                 c.roi_mode = ClassModel::Mode::KNearest;
             else
                 throw InvalidInput("config key 'roi.mode': expected threshold or knearest");
         },
         [](const R& c) { return std::string(roi_mode_name(c.roi_mode)); }},
        {"roi.tau", "threshold on normalized distance",
         [](R& c, string_view v) { c.roi_tau = parse_number<double>("roi.tau", v); },
         [](const R& c) { return format_number(c.roi_tau); }},
        {"roi.k", "tiles kept in knearest mode",
         [](R& c, string_view v) { c.roi_k = parse_number<std::size_t>("roi.k", v); },
         [](const R& c) { return std::to_string(c.roi_k); }},
        {"spin.axis", "global-z or local-normal",
         [](R& c, string_view v) { c.spin_axis = parse_axis_mode(v); },
         [](const R& c) { return std::string(axis_name(c.spin_axis)); }},
        {"spin.radius", "support radius in meters, 0 = half the bounding-box diagonal",
         [](R& c, string_view v) { c.spin_radius = parse_number<double>("spin.radius", v); },
         [](const R& c) { return format_number(c.spin_radius); }},
        {"spin.codebook", "whole-image or patch-11x11",
         [](R& c, string_view v) { c.codebook = parse_codebook_kind(v); },
         [](const R& c) { return std::string(to_string(c.codebook)); }},
        {"spin.parts", "k for part clustering",
         [](R& c, string_view v) { c.parts = parse_number<int>("spin.parts", v); },
         [](const R& c) { return std::to_string(c.parts); }},
    };
    return table;
}

}  // namespace

SDConfig RunConfig::sd_config(Stage s) const {
    SDConfig cfg;
    cfg.bins = sd_bins;
    cfg.exact_sample_budget = sd_sample_budget;
    cfg.rng_seed = stage_seed(s);
    return cfg;
}

EvalConfig RunConfig::eval_config() const {
    EvalConfig cfg;
    cfg.sd = sd_config(Stage::Eval);
    cfg.octree = octree;
    cfg.hsd_level = hsd_level;
    cfg.metric = metric;
    return cfg;
}

void RunConfig::set(std::string_view key, std::string_view value) {
    for (const auto& k : keys())
        if (key == k.name) {
            k.set(*this, value);
            return;
        }
    throw InvalidInput("unknown config key '" + std::string(key) + "'");
}

void RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ParseError("config: expected 'key = value'", n);
        try {
            set(trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)));
        } catch (const InvalidInput& e) {
            throw ParseError(std::string("config: ") + e.what(), n);
        }
    }
}

void RunConfig::dump(std::ostream& out) const {
    for (const auto& k : keys()) out << k.name << " = " << k.get(*this) << '\n';
}

std::string RunConfig::describe() {
    std::ostringstream out;
    const RunConfig defaults;
    for (const auto& k : keys()) out << "  " << k.name << " (default " << k.get(defaults) << "): " << k.help << '\n';
    return out.str();
}

}  // namespace lidarshape::cli
