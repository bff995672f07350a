#pragma once

#include "gsrelight/bridge/fixtures.hpp"

#include <memory>
#include <string>

namespace gsr {

/// HTTP server on 127.0.0.1 speaking the bridge protocol on top of a
/// FixtureBackend. Serves POST /rpc, GET /healthz and GET /capabilities.
class LoopbackServer {
public:
    /// port 0 picks a free port. A non-empty token is required as a bearer token.
    explicit LoopbackServer(FixtureOptions options = {}, int port = 0, std::string token = {});
    ~LoopbackServer();

    LoopbackServer(const LoopbackServer&) = delete;
    LoopbackServer& operator=(const LoopbackServer&) = delete;

    [[nodiscard]] int port() const noexcept;
    [[nodiscard]] std::string url() const;
    void stop();
    /// Blocks until stop() is called from another thread.
    void wait();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace gsr
