#pragma once

#include "planehead/session.hpp"

#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace planehead {

// [revision: u64][count: u32][positions: f32 x 3 x count], little-endian.
std::string encode_frame(std::uint64_t revision, std::span<const Vec3> positions);

struct DecodedFrame {
    std::uint64_t revision = 0;
    std::vector<float> positions;  // 3 per vertex
};
// Throws ParseError on a truncated or inconsistent buffer.
DecodedFrame decode_frame(std::string_view bytes);

// FNV-1a over the triangle index buffer.
std::string connectivity_hash(const Mesh& m);

enum class MessageKind {
    set_global,
    set_edge_weight,
    set_edge_smoothing,
    set_face_planarization,
    toggle_lanteri,
    request_export,
    mesh_frame,
    energy_report,
    error,
};

const char* to_string(MessageKind k);
// Throws InvalidArgument for unknown kinds.
MessageKind message_kind_from_string(const std::string& s);

struct Frame {
    std::uint64_t revision = 0;
    std::vector<Vec3> positions;   // as streamed (float-rounded)
    std::string bytes;             // encoded binary frame
    nlohmann::json energy_report;  // energy_report message for this frame
};

// Applies protocol edits to a session and recomputes frames. With a worker
// thread, edits land in a latest-wins mailbox and one optimize+transfer runs at a
// time; each run is capped by the budget and warm-started from the previous
// anchors, continuing in later runs until converged.
class SessionEngine {
public:
    struct Options {
        double budget_seconds = 0.1;
        bool threaded = true;
    };
    using FrameListener = std::function<void(std::shared_ptr<const Frame>)>;

    SessionEngine(Session& session, StyleParams params, bool lanteri, Options options);
    SessionEngine(Session& session, StyleParams params = {}, bool lanteri = true)
        : SessionEngine(session, std::move(params), lanteri, Options{}) {}
    ~SessionEngine();
    SessionEngine(const SessionEngine&) = delete;
    SessionEngine& operator=(const SessionEngine&) = delete;

    // Handles one control message and returns the reply (ack, export result or
    // error). Invalid messages leave the state unchanged.
    nlohmann::json handle_message(const nlohmann::json& msg);
    nlohmann::json handle_text(std::string_view text);

    // Runs pending work on the calling thread (non-threaded mode); returns true when
    // a frame was produced.
    bool step();
    // Blocks until no edit is pending and the last run converged.
    bool wait_idle(std::chrono::milliseconds timeout);
    bool wait_for_revision(std::uint64_t revision, std::chrono::milliseconds timeout);

    std::shared_ptr<const Frame> latest_frame() const;
    std::uint64_t revision() const;
    StyleParams params() const;
    bool lanteri_enabled() const;
    int runs() const;  // optimize+transfer runs so far
    nlohmann::json connectivity_message() const;
    void set_frame_listener(FrameListener listener);
    const Session& session() const { return session_; }

private:
    struct Work {
        StyleParams params;
        bool lanteri = true;
        std::uint64_t generation = 0;
        std::optional<std::vector<Vec3>> warm_start;
    };

    void worker_loop(std::stop_token stop);
    bool has_work_locked() const;
    Work take_work_locked();
    void run(const Work& work);
    void publish(std::shared_ptr<const Frame> frame);

    Session& session_;
    Options options_;
    std::string connectivity_hash_;

    mutable std::mutex mutex_;
    std::condition_variable_any wake_;
    std::condition_variable idle_;
    StyleParams params_;
    bool lanteri_ = true;
    std::uint64_t generation_ = 0;   // bumped per accepted edit
    std::uint64_t applied_ = 0;      // generation of the last run
    bool converged_ = false;
    bool running_ = false;
    std::uint64_t revision_ = 0;
    int runs_ = 0;
    std::optional<std::vector<Vec3>> last_anchors_;
    std::shared_ptr<const Frame> frame_;
    FrameListener listener_;
    std::jthread worker_;
};

}  // namespace planehead
