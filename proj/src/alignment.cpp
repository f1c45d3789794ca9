#include "lidarshape/alignment.hpp"

#include "lidarshape/kdtree.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lidarshape {
namespace {

constexpr int kFeatureBins = 64;

Eigen::VectorXd radial_distances(const PointCloud& cloud) {
    const Eigen::Vector2d c = cloud.points.topRows<2>().rowwise().mean();
    return (cloud.points.topRows<2>().colwise() - c).colwise().norm().transpose();
}

Eigen::VectorXd plane_distances(const PointCloud& cloud) {
    const Eigen::Vector2d c = cloud.points.topRows<2>().rowwise().mean();
    const Eigen::Matrix2Xd xy = cloud.points.topRows<2>().colwise() - c;
    const Eigen::Matrix2d cov = xy * xy.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    const Eigen::Vector2d normal = es.eigenvectors().col(0);
    return (normal.transpose() * xy).cwiseAbs().transpose();
}

double height_extent(const PointCloud& cloud) { return cloud.points.row(2).maxCoeff() - cloud.points.row(2).minCoeff(); }

double positive_or_one(double v) { return v > 0 && std::isfinite(v) ? v : 1.0; }

Histogram1D thickness_profile(const PointCloud& cloud, std::pair<double, double> range) {
    Histogram1D h(range.first, range.second, kFeatureBins);
    const double zmin = cloud.points.row(2).minCoeff();
    std::vector<Eigen::Index> slab(cloud.size());
    Eigen::Matrix2Xd sums = Eigen::Matrix2Xd::Zero(2, kFeatureBins);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(kFeatureBins);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        slab[i] = h.bin_of(cloud.points(2, static_cast<Eigen::Index>(i)) - zmin);
        sums.col(slab[i]) += cloud.points.col(static_cast<Eigen::Index>(i)).head<2>();
        counts[slab[i]] += 1;
    }
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(kFeatureBins);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Eigen::Vector2d mean = sums.col(slab[i]) / counts[slab[i]];
        ss[slab[i]] += (cloud.points.col(static_cast<Eigen::Index>(i)).head<2>() - mean).squaredNorm();
    }
    for (Eigen::Index k = 0; k < kFeatureBins; ++k)
        if (counts[k] > 0) h.mass()[k] = std::sqrt(ss[k] / counts[k]);
    // Zero horizontal spread everywhere (a single point, a perfect vertical
    // line): fall back to the point-count profile.
    if (!(h.total() > 0)) h.mass() = counts;
    return h.normalize();
}

Histogram1D histogram_of(const Eigen::VectorXd& values, std::pair<double, double> range) {
    Histogram1D h(range.first, range.second, kFeatureBins);
    for (Eigen::Index i = 0; i < values.size(); ++i) h.vote(values[i]);
    return h.normalize();
}

}  // namespace

std::string_view to_string(ShapeFeature f) {
    switch (f) {
        case ShapeFeature::Height: return "height";
        case ShapeFeature::Radial: return "radial";
        case ShapeFeature::PairDistance: return "pair_distance";
        case ShapeFeature::Thickness: return "thickness";
        case ShapeFeature::PlaneDistance: return "plane_distance";
    }
    return "?";
}

FeatureRanges feature_ranges(const std::vector<PointCloud>& objects) {
    double h = 0, r = 0, d = 0, p = 0;
    for (const auto& o : objects) {
        if (o.empty()) throw InvalidInput("feature_ranges: empty object");
        h = std::max(h, height_extent(o));
        r = std::max(r, radial_distances(o).maxCoeff());
        d = std::max(d, o.bounding_diameter());
        p = std::max(p, plane_distances(o).maxCoeff());
    }
    FeatureRanges out;
    out.range[static_cast<int>(ShapeFeature::Height)] = {0.0, positive_or_one(h)};
    out.range[static_cast<int>(ShapeFeature::Radial)] = {0.0, positive_or_one(r)};
    out.range[static_cast<int>(ShapeFeature::PairDistance)] = {0.0, positive_or_one(d)};
    out.range[static_cast<int>(ShapeFeature::Thickness)] = {0.0, positive_or_one(h)};
    out.range[static_cast<int>(ShapeFeature::PlaneDistance)] = {0.0, positive_or_one(p)};
    return out;
}

ShapeFeatureSet shape_features(const PointCloud& cloud, const FeatureRanges& ranges, const SDConfig& cfg) {
    if (cloud.empty()) throw InvalidInput("shape_features: empty cloud");
    ShapeFeatureSet out;
    out.ranges = ranges;
    auto range = [&](ShapeFeature f) { return ranges.range[static_cast<int>(f)]; };
    auto slot = [&](ShapeFeature f) -> Histogram1D& { return out.features[static_cast<int>(f)]; };

    const Eigen::VectorXd heights = (cloud.points.row(2).array() - cloud.points.row(2).minCoeff()).transpose();
    slot(ShapeFeature::Height) = histogram_of(heights, range(ShapeFeature::Height));
    slot(ShapeFeature::Radial) = histogram_of(radial_distances(cloud), range(ShapeFeature::Radial));

    if (cloud.size() >= 2) {
        SDConfig d2 = cfg;
        d2.bins = kFeatureBins;
        d2.fixed_range = range(ShapeFeature::PairDistance);
        slot(ShapeFeature::PairDistance) = exact_sd(cloud, SDKind::D2, d2).histogram;
    } else {
        Histogram1D h(range(ShapeFeature::PairDistance).first, range(ShapeFeature::PairDistance).second, kFeatureBins);
        h.vote(0.0);
        slot(ShapeFeature::PairDistance) = h;
    }

    slot(ShapeFeature::Thickness) = thickness_profile(cloud, range(ShapeFeature::Thickness));
    slot(ShapeFeature::PlaneDistance) = histogram_of(plane_distances(cloud), range(ShapeFeature::PlaneDistance));
    return out;
}

double object_distance(const ShapeFeatureSet& a, const ShapeFeatureSet& b) {
    if (!(a.ranges == b.ranges)) throw InvalidInput("object_distance: feature ranges differ");
    double sum = 0;
    for (int f = 0; f < kShapeFeatureCount; ++f) sum += emd_1d(a.features[f], b.features[f]);
    return sum / kShapeFeatureCount;
}

SimilarityMatrix similarity_matrix(const std::vector<PointCloud>& objects, const SDConfig& cfg) {
    if (objects.size() < 2) throw InvalidInput("similarity_matrix: need at least 2 objects");
    const FeatureRanges ranges = feature_ranges(objects);
    std::vector<ShapeFeatureSet> feats;
    feats.reserve(objects.size());
    for (const auto& o : objects) feats.push_back(shape_features(o, ranges, cfg));

    const auto n = static_cast<Eigen::Index>(objects.size());
    SimilarityMatrix s = SimilarityMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) s(i, j) = s(j, i) = object_distance(feats[i], feats[j]);
    return s;
}

void ICPConfig::validate() const {
    if (max_iters < 1) throw InvalidInput("ICP max_iters must be >= 1");
    if (!(trim_fraction >= 0 && trim_fraction < 1)) throw InvalidInput("ICP trim_fraction must be in [0, 1)");
    if (rms_tol && !(*rms_tol >= 0)) throw InvalidInput("ICP rms_tol must be >= 0");
}

Transform4DOF solve_4dof(const Eigen::Matrix3Xd& src, const Eigen::Matrix3Xd& dst) {
    if (src.cols() != dst.cols() || src.cols() == 0) throw InvalidInput("solve_4dof: mismatched correspondence sets");
    const Eigen::Vector3d cs = src.rowwise().mean();
    const Eigen::Vector3d ct = dst.rowwise().mean();
    const Eigen::Matrix2Xd a = src.topRows<2>().colwise() - cs.head<2>();
    const Eigen::Matrix2Xd b = dst.topRows<2>().colwise() - ct.head<2>();
    const double dot = (a.array() * b.array()).sum();
    const double cross = (a.row(0).array() * b.row(1).array() - a.row(1).array() * b.row(0).array()).sum();
    const double theta = (dot == 0 && cross == 0) ? 0.0 : std::atan2(cross, dot);

    Transform4DOF rot(0, 0, 0, theta);
    const Eigen::Vector2d t = ct.head<2>() - rot.rotation() * cs.head<2>();
    return {t.x(), t.y(), ct.z() - cs.z(), theta};
}

ICPResult icp_4dof(const PointCloud& source, const PointCloud& target, const ICPConfig& cfg) {
    cfg.validate();
    if (source.size() < 3 || target.size() < 3) throw InvalidInput("icp_4dof: both clouds need at least 3 points");
    const KdTree tree(target.points);
    const double tol = cfg.rms_tol.value_or(1e-5 * target.bounding_diameter());

    const std::size_t n = source.size();
    const std::size_t trimmed = static_cast<std::size_t>(std::floor(cfg.trim_fraction * static_cast<double>(n)));
    const std::size_t keep = std::max<std::size_t>(3, n - trimmed);

    struct Match {
        std::size_t src;
        std::size_t dst;
        double d2;
    };
    std::vector<Match> matches(n);
    ICPResult result;

    // Trimmed correspondences at the current transform, best `keep` first.
    auto correspond = [&](const Transform4DOF& t) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto nb = tree.nearest(t(source.point(i)));
            matches[i] = {i, nb.index, nb.squared_distance};
        }
        std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
            return a.d2 < b.d2 || (a.d2 == b.d2 && a.src < b.src);
        });
        double ss = 0;
        for (std::size_t i = 0; i < keep; ++i) ss += matches[i].d2;
        return std::sqrt(ss / static_cast<double>(keep));
    };

    Transform4DOF current;
    double rms = correspond(current);
    result.rms_history.push_back(rms);
    for (int iter = 0; iter < cfg.max_iters && rms > tol; ++iter) {
        const std::size_t first_dst = matches.front().dst;
        if (std::all_of(matches.begin(), matches.begin() + static_cast<std::ptrdiff_t>(keep),
                        [&](const Match& m) { return m.dst == first_dst; }))
            throw NumericalError("icp_4dof: every correspondence hits the same target point");

        Eigen::Matrix3Xd src(3, static_cast<Eigen::Index>(keep)), dst(3, static_cast<Eigen::Index>(keep));
        for (std::size_t i = 0; i < keep; ++i) {
            src.col(static_cast<Eigen::Index>(i)) = current(source.point(matches[i].src));
            dst.col(static_cast<Eigen::Index>(i)) = target.point(matches[i].dst);
        }
        const Transform4DOF candidate = solve_4dof(src, dst) * current;
        const double next = correspond(candidate);
        if (next > rms) break;  // round-off only; keep the objective monotone
        current = candidate;
        const double improvement = rms - next;
        rms = next;
        result.rms_history.push_back(rms);
        if (improvement <= tol) break;
    }
    result.transform = current;
    result.final_rms = rms;
    result.iterations = static_cast<int>(result.rms_history.size());
    return result;
}

GroupAlignment align_group(const std::vector<PointCloud>& objects, const SimilarityMatrix& similarity,
                           const ICPConfig& cfg) {
    const auto n = objects.size();
    if (n < 2) throw InvalidInput("align_group: need at least 2 objects");
    if (similarity.rows() != static_cast<Eigen::Index>(n) || similarity.cols() != static_cast<Eigen::Index>(n))
        throw InvalidInput("align_group: similarity matrix size differs from object count");

    GroupAlignment out;
    out.transforms.assign(n, Transform4DOF::identity());
    std::vector<std::size_t> set_of(n);
    std::iota(set_of.begin(), set_of.end(), std::size_t{0});
    std::vector<std::vector<std::size_t>> sets(n);
    for (std::size_t i = 0; i < n; ++i) sets[i] = {i};

    for (std::size_t merge = 0; merge + 1 < n; ++merge) {
        // Single linkage: the closest cross-set object pair is both the set
        // distance and the pair to align. Ties go to the lowest (i, j).
        std::size_t bi = 0, bj = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (set_of[i] != set_of[j] && similarity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) < best) {
                    best = similarity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                    bi = i;
                    bj = j;
                }

        std::size_t keep_set = set_of[bi], move_set = set_of[bj];
        const auto& ks = sets[keep_set];
        const auto& ms = sets[move_set];
        if (ms.size() > ks.size() || (ms.size() == ks.size() && ms.front() < ks.front())) std::swap(keep_set, move_set);
        const std::size_t tgt = set_of[bi] == keep_set ? bi : bj;
        const std::size_t src = tgt == bi ? bj : bi;

        MergeRecord rec;
        rec.target_object = tgt;
        rec.source_object = src;
        rec.distance = best;
        try {
            const auto res = icp_4dof(apply_transform(objects[src], out.transforms[src]),
                                      apply_transform(objects[tgt], out.transforms[tgt]), cfg);
            rec.step = res.transform;
            rec.icp_rms = res.final_rms;
        } catch (const Error& e) {
            throw AlignmentAborted(std::string("align_group: merge ") + std::to_string(merge + 1) + " failed: " + e.what(),
                                   out);
        }

        for (auto o : sets[move_set]) {
            out.transforms[o] = rec.step * out.transforms[o];
            set_of[o] = keep_set;
        }
        rec.moved = sets[move_set];
        sets[keep_set].insert(sets[keep_set].end(), sets[move_set].begin(), sets[move_set].end());
        std::sort(sets[keep_set].begin(), sets[keep_set].end());
        sets[move_set].clear();
        out.merges.push_back(std::move(rec));
    }
    return out;
}

GroupAlignment align_group(const std::vector<PointCloud>& objects, const ICPConfig& cfg, const SDConfig& sd_cfg) {
    return align_group(objects, similarity_matrix(objects, sd_cfg), cfg);
}

}  // namespace lidarshape
