#pragma once

#include "planehead/abstractor.hpp"
#include "planehead/metrics.hpp"
#include "planehead/stylizer.hpp"
#include "planehead/transferrer.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace planehead {

struct PipelineOptions {
    int pyramid_levels = 8;
    double prune_threshold = 1e-6;
    AbstractOptions abstract;
};

struct StylizeResult {
    OptimizationState state;
    std::vector<AffineTransform> transforms;  // index r - 1
    ScaleField scale;
    std::vector<Vec3> positions;
    double optimize_seconds = 0.0;
    double transfer_seconds = 0.0;
};

// Lanteri terms with reference positions taken from `m` and skinning weights
// frozen from the pyramid at the given per-vertex smoothing scale.
std::vector<LanteriTerm> bind_lanteri_terms(const Mesh& m, const LandmarkSet& landmarks,
                                            const std::vector<LanteriConstraint>& constraints,
                                            const SkinningPyramid& pyramid,
                                            std::span<const double> scale);

// Everything precomputed for one mesh: abstraction, pyramid, smoothing-scale
// factorizations. Not copyable or movable (the solver refers to the mesh).
class Session {
public:
    Session(Mesh mesh, RegionLabeling labels, LandmarkSet landmarks = {},
            const PipelineOptions& options = {});
    // Reuses a stored abstraction instead of rebuilding it.
    Session(Mesh mesh, RegionLabeling labels, AbstractedMesh abstracted, LandmarkSet landmarks,
            const PipelineOptions& options);
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    const Mesh& mesh() const { return mesh_; }
    const RegionLabeling& labels() const { return labels_; }
    const AbstractedMesh& abstracted() const { return abstracted_; }
    const SkinningPyramid& pyramid() const { return pyramid_; }
    const RegionAdjacency& adjacency() const { return adjacency_; }
    const LandmarkSet& landmarks() const { return landmarks_; }
    const PipelineOptions& options() const { return options_; }
    const std::vector<LanteriConstraint>& constraints() const { return constraints_; }
    void set_constraints(std::vector<LanteriConstraint> c) { constraints_ = std::move(c); }

    ScaleField scale_field(const StyleParams& params);
    // Optimize then transfer. Lanteri terms are bound at the current scale field.
    StylizeResult stylize(const StyleParams& params, bool lanteri, const OptimizeOptions& options = {});

private:
    void init();

    PipelineOptions options_;
    Mesh mesh_;
    RegionLabeling labels_;
    AbstractedMesh abstracted_;
    LandmarkSet landmarks_;
    std::vector<LanteriConstraint> constraints_;
    RegionAdjacency adjacency_;
    SkinningPyramid pyramid_;
    std::unique_ptr<SmoothingScaleSolver> solver_;
};

// Persistent session: the mesh is referenced by path and content hash.
struct SessionFile {
    std::string mesh_path;
    std::string mesh_hash;
    RegionLabeling labels;
    AbstractedMesh abstracted;
    StyleParams params;
    std::vector<LanteriConstraint> constraints;
    LandmarkSet landmarks;
    bool lanteri_enabled = true;
    int pyramid_levels = 8;
    double prune_threshold = 1e-6;
};

nlohmann::json to_json(const SessionFile& s);
SessionFile session_file_from_json(const nlohmann::json& j);
void save_session(const std::filesystem::path& path, const SessionFile& s);
SessionFile load_session(const std::filesystem::path& path);

SessionFile make_session_file(const Session& session, const std::filesystem::path& mesh_path,
                              const StyleParams& params, bool lanteri_enabled);
// Loads the referenced mesh; throws Error when its content hash differs.
std::unique_ptr<Session> open_session(const SessionFile& s);

}  // namespace planehead
