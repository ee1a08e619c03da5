#include "planehead/server.hpp"

#include <spdlog/spdlog.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <deque>
#include <optional>
#include <set>
#include <thread>

namespace planehead {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

struct Outgoing {
    std::shared_ptr<const std::string> data;
    bool binary = false;
};

class Client;

struct Hub {
    std::set<std::shared_ptr<Client>> clients;
};

class Client : public std::enable_shared_from_this<Client> {
public:
    Client(tcp::socket socket, SessionEngine& engine, Hub& hub)
        : ws_(std::move(socket)), engine_(engine), hub_(hub) {}

    void start() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
    }

    // Frames replace any frame still waiting in the queue.
    void send_frame(std::shared_ptr<const Frame> frame) {
        auto bytes = std::shared_ptr<const std::string>(frame, &frame->bytes);
        auto report = std::make_shared<const std::string>(frame->energy_report.dump());
        bool replaced = false;
        for (std::size_t i = writing_ ? 1 : 0; i < queue_.size(); ++i)
            if (queue_[i].binary) {
                queue_[i].data = bytes;
                replaced = true;
            }
        if (!replaced) queue_.push_back({bytes, true});
        queue_.push_back({report, false});
        flush();
    }

    void send_text(std::string text) {
        queue_.push_back({std::make_shared<const std::string>(std::move(text)), false});
        flush();
    }

    void close() {
        beast::error_code ec;
        beast::get_lowest_layer(ws_).socket().close(ec);
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) {
            spdlog::warn("websocket handshake failed: {}", ec.message());
            hub_.clients.erase(shared_from_this());
            return;
        }
        spdlog::info("client connected");
        send_text(engine_.connectivity_message().dump());
        send_frame(engine_.latest_frame());
        read();
    }

    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->on_read(ec);
        });
    }

    void on_read(beast::error_code ec) {
        if (ec) {
            if (ec != websocket::error::closed) spdlog::debug("client read ended: {}", ec.message());
            hub_.clients.erase(shared_from_this());
            return;
        }
        std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        nlohmann::json reply;
        if (!ws_.got_text()) {
            reply = {{"kind", "error"}, {"message", "control messages must be text"}, {"revision", engine_.revision()}};
        } else {
            reply = engine_.handle_text(text);
        }
        send_text(reply.dump());
        read();
    }

    void flush() {
        if (writing_ || queue_.empty()) return;
        writing_ = true;
        const Outgoing& out = queue_.front();
        ws_.binary(out.binary);
        ws_.async_write(asio::buffer(*out.data), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->on_write(ec);
        });
    }

    void on_write(beast::error_code ec) {
        writing_ = false;
        queue_.pop_front();
        if (ec) {
            spdlog::debug("client write failed: {}", ec.message());
            hub_.clients.erase(shared_from_this());
            return;
        }
        flush();
    }

    websocket::stream<beast::tcp_stream> ws_;
    SessionEngine& engine_;
    Hub& hub_;
    beast::flat_buffer buffer_;
    std::deque<Outgoing> queue_;
    bool writing_ = false;
};

}  // namespace

struct LiveServer::Impl {
    Impl(SessionEngine& e, unsigned short port, const std::string& address)
        : engine(e), acceptor(ioc) {
        const tcp::endpoint endpoint(asio::ip::make_address(address), port);
        acceptor.open(endpoint.protocol());
        acceptor.set_option(asio::socket_base::reuse_address(true));
        acceptor.bind(endpoint);
        acceptor.listen();
        engine.set_frame_listener([this](std::shared_ptr<const Frame> frame) {
            asio::post(ioc, [this, frame] {
                for (const auto& c : std::vector<std::shared_ptr<Client>>(hub.clients.begin(), hub.clients.end()))
                    c->send_frame(frame);
            });
        });
        accept();
    }

    ~Impl() { engine.set_frame_listener({}); }

    void accept() {
        acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (ec != asio::error::operation_aborted) spdlog::warn("accept failed: {}", ec.message());
                return;
            }
            auto client = std::make_shared<Client>(std::move(socket), engine, hub);
            hub.clients.insert(client);
            client->start();
            accept();
        });
    }

    SessionEngine& engine;
    asio::io_context ioc{1};
    tcp::acceptor acceptor;
    Hub hub;
    std::optional<asio::signal_set> signals;
    std::thread thread;
};

LiveServer::LiveServer(SessionEngine& engine, unsigned short port, const std::string& address)
    : impl_(std::make_unique<Impl>(engine, port, address)) {}

LiveServer::~LiveServer() {
    stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

unsigned short LiveServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void LiveServer::run() {
    spdlog::info("serving on port {}", port());
    impl_->ioc.run();
}

void LiveServer::start() {
    impl_->thread = std::thread([this] { run(); });
}

void LiveServer::stop_on_signals() {
    impl_->signals.emplace(impl_->ioc, SIGINT, SIGTERM);
    impl_->signals->async_wait([this](beast::error_code ec, int) {
        if (!ec) stop();
    });
}

void LiveServer::stop() {
    asio::post(impl_->ioc, [impl = impl_.get()] {
        beast::error_code ec;
        impl->acceptor.close(ec);
        for (const auto& c : impl->hub.clients) c->close();
        impl->hub.clients.clear();
    });
    impl_->ioc.stop();
}

}  // namespace planehead
