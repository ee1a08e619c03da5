#pragma once

#include "planehead/service.hpp"

#include <memory>
#include <string>

namespace planehead {

// Websocket front end for a SessionEngine. On connect a client receives the
// connectivity message and the latest frame; text messages are control edits,
// binary messages are mesh frames. Each client keeps at most one unsent frame.
class LiveServer {
public:
    // Port 0 picks a free port.
    LiveServer(SessionEngine& engine, unsigned short port = 7870, const std::string& address = "127.0.0.1");
    ~LiveServer();
    LiveServer(const LiveServer&) = delete;
    LiveServer& operator=(const LiveServer&) = delete;

    unsigned short port() const;
    // Serves on the calling thread until stop().
    void run();
    // Serves on a background thread.
    void start();
    void stop();
    // SIGINT/SIGTERM stop the server.
    void stop_on_signals();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace planehead
