#include "lidarshape/spin_image.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

namespace lidarshape {
namespace {

constexpr int kNormalNeighbours = 16;

Eigen::Vector3d estimate_normal(const Eigen::Matrix3Xd& pts, const KdTree& tree, std::size_t index) {
    const auto nbrs = tree.knn(pts.col(static_cast<Eigen::Index>(index)), kNormalNeighbours);
    if (nbrs.size() < 3) return Eigen::Vector3d::UnitZ();
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& n : nbrs) mean += pts.col(static_cast<Eigen::Index>(n.index));
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& n : nbrs) {
        const Eigen::Vector3d d = pts.col(static_cast<Eigen::Index>(n.index)) - mean;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    Eigen::Vector3d normal = es.eigenvectors().col(0);
    if (normal.z() < 0) normal = -normal;
    return normal;
}

/// Flip each column so its largest-magnitude entry is positive.
void canonical_signs(Eigen::MatrixXd& basis) {
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        Eigen::Index r = 0;
        basis.col(c).cwiseAbs().maxCoeff(&r);
        if (basis(r, c) < 0) basis.col(c) = -basis.col(c);
    }
}

/// Top eigenpairs of a symmetric matrix, descending.
void top_eigen(const Eigen::MatrixXd& cov, int count, Eigen::MatrixXd& basis, Eigen::VectorXd& values) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw NumericalError("PCA eigendecomposition failed");
    values = es.eigenvalues().reverse();
    basis = es.eigenvectors().rightCols(count).rowwise().reverse();
    values = values.cwiseMax(0.0);
    canonical_signs(basis);
}

Eigen::VectorXd mean_patch(const SpinGrid& grid) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(kPatchDims);
    for (int r = 0; r < kSpinRows; ++r)
        for (int c = 0; c < kSpinCols; ++c) acc += extract_patch(grid, r, c);
    return acc / static_cast<double>(kSpinDims);
}

std::vector<double> parse_csv_doubles(const std::string& line, std::size_t lineno) {
    std::vector<double> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size() && cell.find_first_not_of(" \t\r", used) != std::string::npos)
                throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw ParseError("invalid number '" + cell + "' in codebook", lineno);
        }
    }
    return out;
}

}  // namespace

Eigen::VectorXd SpinImage::vectorized() const { return Eigen::Map<const Eigen::VectorXd>(grid.data(), kSpinDims); }

AxisMode parse_axis_mode(std::string_view name) {
    if (name == "global-z") return AxisMode::GlobalZ;
    if (name == "local-normal") return AxisMode::LocalNormal;
    throw InvalidInput("unknown axis mode '" + std::string(name) + "'");
}

double default_support_radius(const PointCloud& cloud) {
    const double r = 0.5 * cloud.bounds().extent().norm();
    return r > 0 ? r : 1.0;
}

SpinImageGenerator::SpinImageGenerator(const PointCloud& cloud, AxisMode mode, double support_radius)
    : points_(cloud.points), mode_(mode), radius_(support_radius), tree_(cloud.points) {
    if (!(support_radius > 0)) throw InvalidInput("spin image support radius must be > 0");
    if (mode_ == AxisMode::LocalNormal) {
        normals_.reserve(cloud.size());
        for (std::size_t i = 0; i < cloud.size(); ++i) normals_.push_back(estimate_normal(points_, tree_, i));
    }
}

const Eigen::Vector3d& SpinImageGenerator::axis(std::size_t index) const {
    static const Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
    return mode_ == AxisMode::GlobalZ ? up : normals_.at(index);
}

SpinImage SpinImageGenerator::at(std::size_t index) const {
    if (index >= static_cast<std::size_t>(points_.cols())) throw InvalidInput("spin image index out of range");
    SpinImage img;
    img.support_radius = radius_;
    const Eigen::Vector3d p = points_.col(static_cast<Eigen::Index>(index));
    const Eigen::Vector3d& n = axis(index);

    constexpr double col_scale = kSpinCols - 1;
    constexpr double row_scale = kSpinRows - 1;
    for (const auto& nb : tree_.radius(p, radius_)) {
        if (nb.index == index) continue;
        const Eigen::Vector3d d = points_.col(static_cast<Eigen::Index>(nb.index)) - p;
        const double beta = n.dot(d);
        const double alpha = std::sqrt(std::max(0.0, d.squaredNorm() - beta * beta));

        const double u = std::clamp(alpha / radius_, 0.0, 1.0) * col_scale;
        const double v = std::clamp((beta + radius_) / (2 * radius_), 0.0, 1.0) * row_scale;
        int c0 = std::min(static_cast<int>(u), kSpinCols - 2);
        int r0 = std::min(static_cast<int>(v), kSpinRows - 2);
        const double fu = u - c0, fv = v - r0;
        img.grid(r0, c0) += (1 - fv) * (1 - fu);
        img.grid(r0, c0 + 1) += (1 - fv) * fu;
        img.grid(r0 + 1, c0) += fv * (1 - fu);
        img.grid(r0 + 1, c0 + 1) += fv * fu;
    }
    const double total = img.grid.sum();
    if (total > 0) {
        img.grid /= total;
        img.empty = false;
    }
    return img;
}

std::vector<SpinImage> SpinImageGenerator::all() const {
    std::vector<SpinImage> out;
    out.reserve(static_cast<std::size_t>(points_.cols()));
    for (Eigen::Index i = 0; i < points_.cols(); ++i) out.push_back(at(static_cast<std::size_t>(i)));
    return out;
}

SpinImage spin_image_at(const PointCloud& cloud, std::size_t index, AxisMode mode, double support_radius) {
    return SpinImageGenerator(cloud, mode, support_radius).at(index);
}

std::string_view to_string(CodebookKind kind) {
    return kind == CodebookKind::WholeImage ? "whole-image" : "patch-11x11";
}

CodebookKind parse_codebook_kind(std::string_view name) {
    if (name == "whole-image") return CodebookKind::WholeImage;
    if (name == "patch-11x11") return CodebookKind::Patch11x11;
    throw InvalidInput("unknown codebook kind '" + std::string(name) + "'");
}

PcaResult pca(const Eigen::MatrixXd& samples, int count) {
    if (samples.rows() < 1 || count < 1 || count > samples.cols())
        throw InvalidInput("pca: need at least one sample and 1 <= count <= dims");
    PcaResult out;
    out.mean = samples.colwise().mean().transpose();
    const Eigen::MatrixXd centered = samples.rowwise() - out.mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(samples.rows());
    top_eigen(cov, count, out.basis, out.eigenvalues);
    return out;
}

Eigen::VectorXd extract_patch(const SpinGrid& grid, int row, int col) {
    constexpr int half = kPatchSide / 2;
    Eigen::VectorXd patch = Eigen::VectorXd::Zero(kPatchDims);
    for (int dr = -half; dr <= half; ++dr) {
        const int r = row + dr;
        if (r < 0 || r >= kSpinRows) continue;
        for (int dc = -half; dc <= half; ++dc) {
            const int c = col + dc;
            if (c < 0 || c >= kSpinCols) continue;
            patch[(dr + half) * kPatchSide + (dc + half)] = grid(r, c);
        }
    }
    return patch;
}

Codebook train_codebook(const std::vector<SpinImage>& images, CodebookKind kind) {
    if (images.size() <= static_cast<std::size_t>(kCodebookSize))
        throw InvalidInput("train_codebook: need more than " + std::to_string(kCodebookSize) + " images, got " +
                           std::to_string(images.size()));
    Codebook cb;
    cb.kind = kind;
    if (kind == CodebookKind::WholeImage) {
        Eigen::MatrixXd samples(static_cast<Eigen::Index>(images.size()), kSpinDims);
        for (std::size_t i = 0; i < images.size(); ++i)
            samples.row(static_cast<Eigen::Index>(i)) = images[i].vectorized().transpose();
        auto res = pca(samples, kCodebookSize);
        cb.mean = std::move(res.mean);
        cb.basis = std::move(res.basis);
        cb.eigenvalues = std::move(res.eigenvalues);
        return cb;
    }

    // Patches are streamed twice (mean, then centred scatter) rather than
    // materialised: 496 patches per image.
    const double n = static_cast<double>(images.size()) * kSpinDims;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(kPatchDims);
    for (const auto& img : images) mean += mean_patch(img.grid) * kSpinDims;
    mean /= n;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(kPatchDims, kPatchDims);
    for (const auto& img : images)
        for (int r = 0; r < kSpinRows; ++r)
            for (int c = 0; c < kSpinCols; ++c) {
                const Eigen::VectorXd d = extract_patch(img.grid, r, c) - mean;
                cov.selfadjointView<Eigen::Lower>().rankUpdate(d);
            }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= n;
    cb.mean = std::move(mean);
    top_eigen(cov, kCodebookSize, cb.basis, cb.eigenvalues);
    return cb;
}

PointCode encode(const SpinImage& img, const Codebook& cb) {
    const int expect = codebook_dims(cb.kind);
    if (cb.dims() != expect || cb.basis.rows() != expect)
        throw InvalidInput("encode: codebook dims " + std::to_string(cb.dims()) + " do not match " +
                           std::string(to_string(cb.kind)) + " (" + std::to_string(expect) + ")");
    // Projection is linear, so mean-pooling per-pixel patch codes equals
    // projecting the mean patch.
    const Eigen::VectorXd x = cb.kind == CodebookKind::WholeImage ? img.vectorized() : mean_patch(img.grid);
    return {cb.basis.transpose() * (x - cb.mean)};
}

Eigen::VectorXd reconstruct(const PointCode& code, const Codebook& cb) {
    if (code.coeffs.size() != cb.basis.cols()) throw InvalidInput("reconstruct: code length mismatch");
    return cb.mean + cb.basis * code.coeffs;
}

PartLabeling cluster_parts(const std::vector<PointCode>& codes, int k, std::uint64_t seed) {
    const auto n = codes.size();
    if (k < 1 || static_cast<std::size_t>(k) > n) throw InvalidInput("cluster_parts: need 1 <= k <= point count");
    const Eigen::Index dim = codes.front().coeffs.size();
    Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (codes[i].coeffs.size() != dim) throw InvalidInput("cluster_parts: codes differ in length");
        x.col(static_cast<Eigen::Index>(i)) = codes[i].coeffs;
    }

    std::mt19937_64 rng(seed);
    Eigen::MatrixXd centers(dim, k);
    {
        std::uniform_int_distribution<std::size_t> first(0, n - 1);
        centers.col(0) = x.col(static_cast<Eigen::Index>(first(rng)));
        Eigen::VectorXd d2 = (x.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int c = 1; c < k; ++c) {
            const double total = d2.sum();
            Eigen::Index pick = 0;
            if (total > 0) {
                double target = unit(rng) * total;
                for (pick = 0; pick + 1 < d2.size(); ++pick) {
                    target -= d2[pick];
                    if (target < 0 && d2[pick] > 0) break;
                }
            } else {
                pick = static_cast<Eigen::Index>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
            }
            centers.col(c) = x.col(pick);
            d2 = d2.cwiseMin((x.colwise() - centers.col(c)).colwise().squaredNorm().transpose());
        }
    }

    PartLabeling out;
    out.k = k;
    out.labels.assign(n, -1);
    constexpr int kMaxIterations = 100;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        bool changed = false;
        double objective = 0;
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            const double d = (centers.colwise() - x.col(static_cast<Eigen::Index>(i))).colwise().squaredNorm().minCoeff(&best);
            objective += d;
            if (out.labels[i] != static_cast<int>(best)) {
                out.labels[i] = static_cast<int>(best);
                changed = true;
            }
        }
        out.objective_history.push_back(objective);
        out.iterations = iter + 1;
        if (!changed) break;

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(dim, k);
        Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
        for (std::size_t i = 0; i < n; ++i) {
            sums.col(out.labels[i]) += x.col(static_cast<Eigen::Index>(i));
            ++counts[out.labels[i]];
        }
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0) centers.col(c) = sums.col(c) / counts[c];
    }
    return out;
}

void write_codebook(const Codebook& cb, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "kind,dims,count\n" << to_string(cb.kind) << ',' << cb.dims() << ',' << cb.count() << '\n';
    char buf[32];
    auto row = [&](const auto& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", v[i]);
            out << (i ? "," : "") << buf;
        }
        out << '\n';
    };
    row(cb.mean);
    for (Eigen::Index c = 0; c < cb.basis.cols(); ++c) row(cb.basis.col(c));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Codebook read_codebook(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    std::size_t lineno = 0;
    auto next = [&] {
        if (!std::getline(in, line)) throw ParseError("truncated codebook", lineno + 1);
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
    };
    next();
    if (line != "kind,dims,count") throw ParseError("bad codebook header", lineno);
    next();
    std::stringstream ss(line);
    std::string kind_s, dims_s, count_s;
    std::getline(ss, kind_s, ',');
    std::getline(ss, dims_s, ',');
    std::getline(ss, count_s, ',');
    Codebook cb;
    int dims = 0, count = 0;
    try {
        cb.kind = parse_codebook_kind(kind_s);
        dims = std::stoi(dims_s);
        count = std::stoi(count_s);
    } catch (const InvalidInput& e) {
        throw ParseError(e.what(), lineno);
    } catch (const std::exception&) {
        throw ParseError("bad codebook dims/count", lineno);
    }
    if (dims < 1 || count < 1 || count > dims) throw ParseError("bad codebook dims/count", lineno);

    next();
    auto mean = parse_csv_doubles(line, lineno);
    if (static_cast<int>(mean.size()) != dims) throw ParseError("mean row length differs from dims", lineno);
    cb.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), dims);
    cb.basis.resize(dims, count);
    for (int c = 0; c < count; ++c) {
        next();
        auto v = parse_csv_doubles(line, lineno);
        if (static_cast<int>(v.size()) != dims) throw ParseError("basis row length differs from dims", lineno);
        cb.basis.col(c) = Eigen::Map<Eigen::VectorXd>(v.data(), dims);
    }
    return cb;
}

}  // namespace lidarshape
