#include "planehead/session.hpp"

#include "planehead/mesh_io.hpp"

#include <spdlog/spdlog.h>

#include <chrono>

namespace planehead {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<LanteriTerm> bind_lanteri_terms(const Mesh& m, const LandmarkSet& landmarks,
                                            const std::vector<LanteriConstraint>& constraints,
                                            const SkinningPyramid& pyramid,
                                            std::span<const double> scale) {
    std::vector<LanteriTerm> out;
    const double top = pyramid.levels() - 1;
    for (const auto& c : constraints) {
        const std::size_t need = c.kind == LanteriKind::absolute_position ? 1 : 2;
        if (c.landmarks.size() != need)
            throw InvalidArgument("Lanteri constraint '" + c.label + "' needs " + std::to_string(need) +
                                  " landmarks");
        LanteriTerm t;
        t.kind = c.kind;
        t.label = c.label;
        for (std::size_t k = 0; k < need; ++k) {
            const int v = landmarks.at(c.landmarks[k]);
            if (v < 0 || v >= m.vertex_count()) throw InvalidArgument("landmark index out of range");
            t.points[k] = m.vertices()[v];
            t.weights[k] = pyramid.interpolated(v, std::clamp(scale[v], 0.0, top));
        }
        if (need == 1) {
            t.points[1] = t.points[0];
            t.weights[1] = t.weights[0];
        }
        t.check();
        out.push_back(std::move(t));
    }
    return out;
}

Session::Session(Mesh mesh, RegionLabeling labels, LandmarkSet landmarks, const PipelineOptions& options)
    : options_(options), mesh_(std::move(mesh)), labels_(std::move(labels)), landmarks_(std::move(landmarks)) {
    check_labeling(mesh_, labels_);
    abstracted_ = build_abstracted_mesh(mesh_, labels_, options_.abstract);
    init();
}

Session::Session(Mesh mesh, RegionLabeling labels, AbstractedMesh abstracted, LandmarkSet landmarks,
                 const PipelineOptions& options)
    : options_(options),
      mesh_(std::move(mesh)),
      labels_(std::move(labels)),
      abstracted_(std::move(abstracted)),
      landmarks_(std::move(landmarks)) {
    check_labeling(mesh_, labels_);
    if (abstracted_.K != labels_.K) throw InvalidArgument("abstracted mesh does not match the labeling");
    init();
}

void Session::init() {
    landmarks_.validate(mesh_.vertex_count());
    constraints_ = build_lanteri_constraints(landmarks_);
    adjacency_ = region_adjacency(mesh_, labels_);
    pyramid_ = build_skinning_pyramid(mesh_, labels_, options_.pyramid_levels, options_.prune_threshold);
    solver_ = std::make_unique<SmoothingScaleSolver>(mesh_, labels_);
}

ScaleField Session::scale_field(const StyleParams& params) {
    return solver_->solve(boundary_smoothing_values(adjacency_, params));
}

StylizeResult Session::stylize(const StyleParams& params, bool lanteri, const OptimizeOptions& options) {
    params.validate();
    StylizeResult r;
    auto t0 = std::chrono::steady_clock::now();
    r.scale = scale_field(params);
    std::vector<LanteriTerm> terms;
    if (lanteri) terms = bind_lanteri_terms(mesh_, landmarks_, constraints_, pyramid_, r.scale.values);
    StyleProblem problem(abstracted_, params, std::move(terms));
    r.state = optimize(problem, options);
    r.transforms = problem.region_transforms(r.state.proxies);
    r.optimize_seconds = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    r.positions = apply_transfer(mesh_, r.transforms, pyramid_, r.scale.values);
    r.transfer_seconds = seconds_since(t0);
    spdlog::debug("stylize: {} iterations ({}), optimize {:.3f}s, transfer {:.3f}s", r.state.iterations,
                  to_string(r.state.termination), r.optimize_seconds, r.transfer_seconds);
    return r;
}

nlohmann::json to_json(const SessionFile& s) {
    nlohmann::json j;
    j["mesh"] = {{"path", s.mesh_path}, {"hash", s.mesh_hash}};
    j["labels"] = labels_to_json(s.labels);
    j["abstracted"] = to_json(s.abstracted);
    j["params"] = to_json(s.params);
    j["constraints"] = to_json(s.constraints);
    j["landmarks"] = to_json(s.landmarks);
    j["lanteri_enabled"] = s.lanteri_enabled;
    j["pyramid"] = {{"levels", s.pyramid_levels}, {"prune_threshold", s.prune_threshold}};
    return j;
}

SessionFile session_file_from_json(const nlohmann::json& j) {
    try {
        SessionFile s;
        s.mesh_path = j.at("mesh").at("path").get<std::string>();
        s.mesh_hash = j.at("mesh").at("hash").get<std::string>();
        s.labels = labels_from_json(j.at("labels"));
        s.abstracted = abstracted_mesh_from_json(j.at("abstracted"));
        s.params = style_params_from_json(j.at("params"));
        s.constraints = lanteri_constraints_from_json(j.at("constraints"));
        s.landmarks = landmarks_from_json(j.at("landmarks"));
        s.lanteri_enabled = j.at("lanteri_enabled").get<bool>();
        s.pyramid_levels = j.at("pyramid").at("levels").get<int>();
        s.prune_threshold = j.at("pyramid").at("prune_threshold").get<double>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed session: ") + e.what());
    }
}

void save_session(const std::filesystem::path& path, const SessionFile& s) {
    write_json_file(path, to_json(s));
}

SessionFile load_session(const std::filesystem::path& path) {
    return session_file_from_json(read_json_file(path));
}

SessionFile make_session_file(const Session& session, const std::filesystem::path& mesh_path,
                              const StyleParams& params, bool lanteri_enabled) {
    SessionFile s;
    s.mesh_path = std::filesystem::absolute(mesh_path).lexically_normal().string();
    s.mesh_hash = file_content_hash(mesh_path);
    s.labels = session.labels();
    s.abstracted = session.abstracted();
    s.params = params;
    s.constraints = session.constraints();
    s.landmarks = session.landmarks();
    s.lanteri_enabled = lanteri_enabled;
    s.pyramid_levels = session.options().pyramid_levels;
    s.prune_threshold = session.options().prune_threshold;
    return s;
}

std::unique_ptr<Session> open_session(const SessionFile& s) {
    const std::string hash = file_content_hash(s.mesh_path);
    if (hash != s.mesh_hash)
        throw Error("mesh " + s.mesh_path + " changed since the session was saved (hash " + hash +
                    ", expected " + s.mesh_hash + ")");
    PipelineOptions options;
    options.pyramid_levels = s.pyramid_levels;
    options.prune_threshold = s.prune_threshold;
    auto session = std::make_unique<Session>(load_mesh(s.mesh_path), s.labels, s.abstracted, s.landmarks, options);
    session->set_constraints(s.constraints);
    return session;
}

}  // namespace planehead
