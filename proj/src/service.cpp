#include "planehead/service.hpp"

#include "planehead/mesh_io.hpp"

#include <spdlog/spdlog.h>

#include <bit>
#include <cstring>

namespace planehead {

static_assert(std::endian::native == std::endian::little, "frame encoding assumes a little-endian host");

std::string encode_frame(std::uint64_t revision, std::span<const Vec3> positions) {
    const auto count = static_cast<std::uint32_t>(positions.size());
    std::string out(12 + 12 * static_cast<std::size_t>(count), '\0');
    char* p = out.data();
    std::memcpy(p, &revision, 8);
    std::memcpy(p + 8, &count, 4);
    p += 12;
    for (const auto& v : positions) {
        const float xyz[3] = {static_cast<float>(v.x()), static_cast<float>(v.y()), static_cast<float>(v.z())};
        std::memcpy(p, xyz, 12);
        p += 12;
    }
    return out;
}

DecodedFrame decode_frame(std::string_view bytes) {
    if (bytes.size() < 12) throw ParseError("frame shorter than its header");
    DecodedFrame f;
    std::uint32_t count = 0;
    std::memcpy(&f.revision, bytes.data(), 8);
    std::memcpy(&count, bytes.data() + 8, 4);
    if (bytes.size() != 12 + 12 * static_cast<std::size_t>(count))
        throw ParseError("frame size does not match its vertex count");
    f.positions.resize(3 * static_cast<std::size_t>(count));
    std::memcpy(f.positions.data(), bytes.data() + 12, 12 * static_cast<std::size_t>(count));
    return f;
}

std::string connectivity_hash(const Mesh& m) {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& t : m.triangles())
        for (int v : t) {
            const auto u = static_cast<std::uint32_t>(v);
            for (int b = 0; b < 4; ++b) {
                h ^= (u >> (8 * b)) & 0xffu;
                h *= 1099511628211ull;
            }
        }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

const std::pair<MessageKind, const char*> kKinds[] = {
    {MessageKind::set_global, "set_global"},
    {MessageKind::set_edge_weight, "set_edge_weight"},
    {MessageKind::set_edge_smoothing, "set_edge_smoothing"},
    {MessageKind::set_face_planarization, "set_face_planarization"},
    {MessageKind::toggle_lanteri, "toggle_lanteri"},
    {MessageKind::request_export, "request_export"},
    {MessageKind::mesh_frame, "mesh_frame"},
    {MessageKind::energy_report, "energy_report"},
    {MessageKind::error, "error"},
};

bool same_params(const StyleParams& a, const StyleParams& b) { return to_json(a) == to_json(b); }

double number(const nlohmann::json& msg, const char* key) {
    if (!msg.contains(key) || !msg[key].is_number()) throw InvalidArgument(std::string("missing number '") + key + "'");
    const double v = msg[key].get<double>();
    if (!std::isfinite(v)) throw InvalidArgument(std::string("non-finite '") + key + "'");
    return v;
}

RegionPair pair_of(const nlohmann::json& msg) {
    if (!msg.contains("regions") || !msg["regions"].is_array() || msg["regions"].size() != 2 ||
        !msg["regions"][0].is_number_integer() || !msg["regions"][1].is_number_integer())
        throw InvalidArgument("'regions' must be two region ids");
    const int i = msg["regions"][0].get<int>(), j = msg["regions"][1].get<int>();
    if (i == j) throw InvalidArgument("'regions' must name two different regions");
    return make_pair_key(i, j);
}

Vec3 round_to_float(const Vec3& v) {
    return {static_cast<float>(v.x()), static_cast<float>(v.y()), static_cast<float>(v.z())};
}

}  // namespace

const char* to_string(MessageKind k) {
    for (const auto& [kind, name] : kKinds)
        if (kind == k) return name;
    return "?";
}

MessageKind message_kind_from_string(const std::string& s) {
    for (const auto& [kind, name] : kKinds)
        if (s == name) return kind;
    throw InvalidArgument("unknown message kind '" + s + "'");
}

SessionEngine::SessionEngine(Session& session, StyleParams params, bool lanteri, Options options)
    : session_(session), options_(options), params_(std::move(params)), lanteri_(lanteri) {
    params_.validate();
    connectivity_hash_ = connectivity_hash(session_.mesh());
    auto initial = std::make_shared<Frame>();
    initial->revision = 0;
    for (const auto& v : session_.mesh().vertices()) initial->positions.push_back(round_to_float(v));
    initial->bytes = encode_frame(0, session_.mesh().vertices());
    initial->energy_report = {{"kind", "energy_report"}, {"revision", 0}};
    frame_ = std::move(initial);
    generation_ = 1;  // the starting parameters still need a run
    if (options_.threaded) worker_ = std::jthread([this](std::stop_token st) { worker_loop(st); });
}

SessionEngine::~SessionEngine() {
    if (worker_.joinable()) {
        worker_.request_stop();
        wake_.notify_all();
        worker_.join();
    }
}

nlohmann::json SessionEngine::handle_text(std::string_view text) {
    nlohmann::json msg;
    try {
        msg = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        return {{"kind", "error"}, {"message", std::string("malformed JSON: ") + e.what()}, {"revision", revision()}};
    }
    return handle_message(msg);
}

nlohmann::json SessionEngine::handle_message(const nlohmann::json& msg) {
    std::unique_lock lock(mutex_);
    const auto error = [&](const std::string& what) {
        return nlohmann::json{{"kind", "error"}, {"message", what}, {"revision", revision_}};
    };
    try {
        if (!msg.is_object() || !msg.contains("kind") || !msg["kind"].is_string())
            throw InvalidArgument("message needs a string 'kind'");
        const std::string kind_name = msg["kind"].get<std::string>();
        const MessageKind kind = message_kind_from_string(kind_name);
        StyleParams next = params_;
        bool lanteri = lanteri_;
        const int K = session_.abstracted().K;
        switch (kind) {
            case MessageKind::set_global: {
                if (!msg.contains("param") || !msg["param"].is_string()) throw InvalidArgument("missing 'param'");
                const std::string p = msg["param"].get<std::string>();
                const double v = number(msg, "value");
                if (p == "lambda_d") next.lambda_d = v;
                else if (p == "lambda_f") next.lambda_f = v;
                else if (p == "lambda_a") next.lambda_a = v;
                else if (p == "lambda_e") next.lambda_e = v;
                else if (p == "lambda_v") next.lambda_v = v;
                else if (p == "lambda_n") next.lambda_n = v;
                else if (p == "mu") next.mu = v;
                else if (p == "smoothing") next.smoothing = v;
                else throw InvalidArgument("unknown global parameter '" + p + "'");
                break;
            }
            case MessageKind::set_edge_weight: {
                const RegionPair key = pair_of(msg);
                const auto pairs = session_.abstracted().region_pairs();
                if (std::find(pairs.begin(), pairs.end(), key) == pairs.end())
                    throw InvalidArgument("regions " + std::to_string(key.first) + " and " +
                                          std::to_string(key.second) + " share no optimized boundary");
                next.edge_scale[key] = number(msg, "scale");
                break;
            }
            case MessageKind::set_edge_smoothing: {
                const RegionPair key = pair_of(msg);
                if (!session_.adjacency().boundary_length.count(key))
                    throw InvalidArgument("regions " + std::to_string(key.first) + " and " +
                                          std::to_string(key.second) + " are not adjacent");
                next.edge_smoothing[key] = number(msg, "value");
                break;
            }
            case MessageKind::set_face_planarization: {
                if (!msg.contains("region") || !msg["region"].is_number_integer())
                    throw InvalidArgument("missing integer 'region'");
                const int r = msg["region"].get<int>();
                if (r < 1 || r > K) throw InvalidArgument("region " + std::to_string(r) + " out of range");
                next.region_mu[r] = number(msg, "mu");
                break;
            }
            case MessageKind::toggle_lanteri: {
                if (!msg.contains("enabled") || !msg["enabled"].is_boolean())
                    throw InvalidArgument("missing boolean 'enabled'");
                lanteri = msg["enabled"].get<bool>();
                break;
            }
            case MessageKind::request_export: {
                if (!msg.contains("path") || !msg["path"].is_string()) throw InvalidArgument("missing 'path'");
                const auto frame = frame_;
                lock.unlock();
                const std::string path = msg["path"].get<std::string>();
                save_mesh(path, frame->positions, session_.mesh().triangles());
                return {{"kind", "ack"}, {"request", kind_name}, {"path", path}, {"revision", frame->revision}};
            }
            default:
                throw InvalidArgument("'" + kind_name + "' is a server message");
        }
        for (const auto& [key, v] : next.edge_smoothing)
            if (v < 0.0) throw InvalidArgument("smoothing scale must be >= 0");
        if (next.smoothing < 0.0) throw InvalidArgument("smoothing scale must be >= 0");
        next.validate();
        const bool changed = !same_params(next, params_) || lanteri != lanteri_;
        if (changed) {
            params_ = std::move(next);
            lanteri_ = lanteri;
            ++generation_;
            lock.unlock();
            wake_.notify_all();
            lock.lock();
        }
        return {{"kind", "ack"}, {"request", kind_name}, {"changed", changed}, {"revision", revision_}};
    } catch (const Error& e) {
        return error(e.what());
    }
}

bool SessionEngine::has_work_locked() const { return generation_ != applied_ || !converged_; }

SessionEngine::Work SessionEngine::take_work_locked() {
    running_ = true;
    return {params_, lanteri_, generation_, last_anchors_};
}

void SessionEngine::run(const Work& work) {
    OptimizeOptions opts;
    opts.time_budget_seconds = options_.budget_seconds;
    opts.warm_start = work.warm_start;
    StylizeResult r;
    std::string failure;
    try {
        r = session_.stylize(work.params, work.lanteri, opts);
    } catch (const Error& e) {
        failure = e.what();
    }

    std::shared_ptr<Frame> frame;
    {
        std::lock_guard lock(mutex_);
        running_ = false;
        ++runs_;
        applied_ = work.generation;
        if (!failure.empty()) {
            converged_ = true;
            spdlog::error("stylization failed: {}", failure);
        } else {
            converged_ = r.state.termination != Termination::time_budget;
            last_anchors_ = r.state.anchors;
            frame = std::make_shared<Frame>();
            frame->revision = ++revision_;
            frame->positions.reserve(r.positions.size());
            for (const auto& v : r.positions) frame->positions.push_back(round_to_float(v));
            frame->bytes = encode_frame(frame->revision, r.positions);
            const auto& b = r.state.breakdown;
            double offset = 0.0;
            const StyleProblem problem(session_.abstracted(), work.params);
            for (const auto& [key, w] : problem.edge_weights()) offset += work.params.lambda_d * w;
            frame->energy_report = {
                {"kind", "energy_report"},
                {"revision", frame->revision},
                {"energy", b.total() - b.style + b.style_dot},
                {"residual_energy", b.total()},
                {"exaggeration", b.style_dot},
                {"offset", offset},
                {"flatness", b.flatness},
                {"area", b.area},
                {"edge", b.edge},
                {"vertex", b.vertex},
                {"normal", b.normal},
                {"lanteri", b.lanteri},
                {"iterations", r.state.iterations},
                {"termination", to_string(r.state.termination)},
                {"converged", converged_},
                {"optimize_ms", 1e3 * r.optimize_seconds},
                {"transfer_ms", 1e3 * r.transfer_seconds},
            };
            frame_ = frame;
        }
    }
    if (frame) publish(frame);
    idle_.notify_all();
}

void SessionEngine::publish(std::shared_ptr<const Frame> frame) {
    FrameListener listener;
    {
        std::lock_guard lock(mutex_);
        listener = listener_;
    }
    if (listener) listener(std::move(frame));
}

void SessionEngine::worker_loop(std::stop_token stop) {
    while (true) {
        Work work;
        {
            std::unique_lock lock(mutex_);
            if (!wake_.wait(lock, stop, [&] { return has_work_locked(); })) return;
            work = take_work_locked();
        }
        run(work);
    }
}

bool SessionEngine::step() {
    Work work;
    {
        std::lock_guard lock(mutex_);
        if (options_.threaded) throw Error("step() is for engines without a worker thread");
        if (!has_work_locked()) return false;
        work = take_work_locked();
    }
    const auto before = revision();
    run(work);
    return revision() != before;
}

bool SessionEngine::wait_idle(std::chrono::milliseconds timeout) {
    if (!options_.threaded) {
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        while (step())
            if (std::chrono::steady_clock::now() > deadline) return false;
        return true;
    }
    std::unique_lock lock(mutex_);
    return idle_.wait_for(lock, timeout, [&] { return !running_ && !has_work_locked(); });
}

bool SessionEngine::wait_for_revision(std::uint64_t revision, std::chrono::milliseconds timeout) {
    if (!options_.threaded) {
        while (this->revision() < revision)
            if (!step()) return false;
        return true;
    }
    std::unique_lock lock(mutex_);
    return idle_.wait_for(lock, timeout, [&] { return revision_ >= revision; });
}

std::shared_ptr<const Frame> SessionEngine::latest_frame() const {
    std::lock_guard lock(mutex_);
    return frame_;
}

std::uint64_t SessionEngine::revision() const {
    std::lock_guard lock(mutex_);
    return revision_;
}

StyleParams SessionEngine::params() const {
    std::lock_guard lock(mutex_);
    return params_;
}

bool SessionEngine::lanteri_enabled() const {
    std::lock_guard lock(mutex_);
    return lanteri_;
}

int SessionEngine::runs() const {
    std::lock_guard lock(mutex_);
    return runs_;
}

nlohmann::json SessionEngine::connectivity_message() const {
    const Mesh& m = session_.mesh();
    std::vector<int> flat;
    flat.reserve(3 * m.triangles().size());
    for (const auto& t : m.triangles()) flat.insert(flat.end(), t.begin(), t.end());
    auto regions = nlohmann::json::array();
    for (const auto& [i, j] : session_.abstracted().region_pairs()) regions.push_back({i, j});
    return {{"kind", "connectivity"},
            {"vertex_count", m.vertex_count()},
            {"triangles", std::move(flat)},
            {"face_labels", session_.labels().face_labels},
            {"K", session_.labels().K},
            {"region_pairs", std::move(regions)},
            {"hash", connectivity_hash_}};
}

void SessionEngine::set_frame_listener(FrameListener listener) {
    std::lock_guard lock(mutex_);
    listener_ = std::move(listener);
}

}  // namespace planehead
