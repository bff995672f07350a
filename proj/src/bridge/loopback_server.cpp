#include "gsrelight/bridge/loopback_server.hpp"

#include "gsrelight/bridge/protocol.hpp"
#include "gsrelight/core/error.hpp"

#include <httplib.h>

#include <thread>

namespace gsr {

struct LoopbackServer::Impl {
    FixtureBackend backend;
    httplib::Server server;
    std::thread thread;
    std::string token;
    int port = 0;

    explicit Impl(FixtureOptions options) : backend(options) {}
};

LoopbackServer::LoopbackServer(FixtureOptions options, int port, std::string token)
    : impl_(std::make_unique<Impl>(options)) {
    impl_->token = std::move(token);
    Impl* impl = impl_.get();

    auto authorized = [impl](const httplib::Request& req) {
        return impl->token.empty() || req.get_header_value("Authorization") == "Bearer " + impl->token;
    };
    impl->server.Post("/rpc", [impl, authorized](const httplib::Request& req, httplib::Response& res) {
        if (!authorized(req)) {
            res.status = 401;
            res.set_content(make_error_reply("", "unauthorized", "missing or wrong bearer token").dump(),
                            "application/json");
            return;
        }
        nlohmann::json request;
        try {
            request = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception& e) {
            res.status = 400;
            res.set_content(make_error_reply("", "bad_request", e.what()).dump(), "application/json");
            return;
        }
        auto [status, reply] = impl->backend.handle(request);
        res.status = status;
        res.set_content(reply.dump(), "application/json");
    });
    impl->server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"ok":true})", "application/json");
    });
    impl->server.Get("/capabilities", [impl](const httplib::Request&, httplib::Response& res) {
        res.set_content(impl->backend.capabilities().dump(), "application/json");
    });

    if (port == 0) {
        impl->port = impl->server.bind_to_any_port("127.0.0.1");
    } else {
        impl->port = impl->server.bind_to_port("127.0.0.1", port) ? port : -1;
    }
    require(impl->port > 0, ErrorCode::IoFailure, "cannot bind loopback server");
    impl->thread = std::thread([impl] { impl->server.listen_after_bind(); });
    impl->server.wait_until_ready();
}

LoopbackServer::~LoopbackServer() {
    stop();
}

int LoopbackServer::port() const noexcept {
    return impl_->port;
}

std::string LoopbackServer::url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

void LoopbackServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

void LoopbackServer::wait() {
    if (impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

} // namespace gsr
