#pragma once

#include "planehead/mesh.hpp"
#include "planehead/stylizer.hpp"
#include "planehead/transforms.hpp"

#include <Eigen/SparseCholesky>
#include <json.hpp>

#include <map>
#include <memory>
#include <span>
#include <vector>

namespace planehead {

// Per-vertex region weights at increasing amounts of smoothing. Level 0 holds
// the normalized incident-face counts; level l applies 2^(l-1) further passes of
// uniform neighbor averaging to level l-1.
class SkinningPyramid {
public:
    struct Options {
        int levels = 8;
        double prune_threshold = 1e-6;
    };

    SkinningPyramid() = default;
    SkinningPyramid(const Mesh& m, const RegionLabeling& labels, Options options);

    int levels() const { return static_cast<int>(offsets_.size()); }
    int vertex_count() const { return vertex_count_; }
    const Options& options() const { return options_; }
    // Averaging passes applied to reach each level from the previous one.
    std::vector<int> schedule() const;

    std::span<const std::pair<int, double>> weights(int level, int v) const {
        const auto& off = offsets_[level];
        return {entries_[level].data() + off[v], entries_[level].data() + off[v + 1]};
    }
    // Linear interpolation between levels floor(scale) and floor(scale) + 1.
    // `scale` must already lie in [0, levels - 1].
    RegionWeights interpolated(int v, double scale) const;

private:
    Options options_;
    int vertex_count_ = 0;
    std::vector<std::vector<int>> offsets_;
    std::vector<std::vector<std::pair<int, double>>> entries_;
};

// L > 12 is rejected.
SkinningPyramid build_skinning_pyramid(const Mesh& m, const RegionLabeling& labels, int levels = 8,
                                       double prune_threshold = 1e-6);

struct ScaleField {
    std::vector<double> values;
    // Vertices cut off from every Dirichlet value; they copy the nearest one.
    std::vector<int> isolated_vertices;
};

// Harmonic interpolation of per-boundary smoothing scales inside each region,
// with the clamped cotangent Laplacian. Factorizations are cached per region and
// Dirichlet set, so changing only the values reuses them.
class SmoothingScaleSolver {
public:
    SmoothingScaleSolver(const Mesh& m, const RegionLabeling& labels);
    ~SmoothingScaleSolver();
    SmoothingScaleSolver(SmoothingScaleSolver&&) noexcept;
    SmoothingScaleSolver& operator=(SmoothingScaleSolver&&) noexcept;

    ScaleField solve(const std::map<RegionPair, double>& boundary_values);
    int factorization_count() const { return factorizations_; }

private:
    struct RegionCache;
    const Mesh* mesh_;
    std::vector<int> labels_;
    int max_label_ = 0;
    std::vector<std::vector<int>> region_faces_;
    // Border pairs touching each vertex.
    std::vector<std::vector<RegionPair>> vertex_pairs_;
    std::map<int, std::unique_ptr<RegionCache>> cache_;
    int factorizations_ = 0;
};

ScaleField diffuse_smoothing_scale(const Mesh& m, const RegionLabeling& labels,
                                   const std::map<RegionPair, double>& boundary_values);

// Every adjacent region pair (including pairs with region 0) mapped to params' smoothing scale.
std::map<RegionPair, double> boundary_smoothing_values(const RegionAdjacency& adjacency,
                                                       const StyleParams& params);

// Deformed positions: v_i -> (sum_r w_ir T_r) v_i with weights interpolated from
// the pyramid at scale[i] (clamped to [0, L-1]). transforms[r - 1] for region r.
std::vector<Vec3> apply_transfer(const Mesh& m, std::span<const AffineTransform> transforms,
                                 const SkinningPyramid& pyramid, std::span<const double> scale);

nlohmann::json to_json(const SkinningPyramid& p);
nlohmann::json to_json(const ScaleField& s);

}  // namespace planehead
