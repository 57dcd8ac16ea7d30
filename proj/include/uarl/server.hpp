#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "uarl/address_space.hpp"
#include "uarl/endpoint.hpp"
#include "uarl/wire.hpp"

namespace uarl {

class BindError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Thrown by a method handler to report a fault; the server answers with
/// call status 4 and the fault text as results[0].
class MethodFault : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Server-side error codes carried in wire::ErrorMsg frames (protocol.md).
namespace errcode {
inline constexpr uint16_t bad_version = 1;
inline constexpr uint16_t no_such_node = 2;
inline constexpr uint16_t no_value = 3;
inline constexpr uint16_t bad_request = 4;
inline constexpr uint16_t internal = 5;
}  // namespace errcode

/// TCP node server hosting one AddressSpace. Sessions are accepted
/// concurrently but every request is serialized against the space, so each
/// request observes the space either before or after any other request's
/// full effect. Notify frames for a value change are sent before the
/// response of the request that caused it.
struct ServerOptions {
    std::string server_name = "uarl-server";
};

class Server {
  public:
    using MethodHandler = std::function<std::pair<uint8_t, std::vector<Value>>(
        AddressSpace&, const std::vector<Value>&)>;
    using WriteHook =
        std::function<void(AddressSpace&, const NodeId&, const Value&)>;

    Server(Endpoint endpoint, AddressSpace space, ServerOptions options = {});
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Registers a handler for an existing Method node. Call before start().
    void add_method(const NodeId& method, MethodHandler handler);

    /// Invoked after every successful write (changed or not), still inside
    /// the serialization domain and before the WriteResp is sent.
    void set_write_hook(WriteHook hook);

    /// Binds and starts accepting. Throws BindError if the endpoint is taken.
    void start();

    /// Graceful shutdown: close the listener and all sessions, join threads.
    void stop();

    /// Runs fn against the address space inside the serialization domain;
    /// value changes notify subscribers exactly as writes do.
    void execute(const std::function<void(AddressSpace&)>& fn);

    uint16_t port() const { return port_; }
    Endpoint endpoint() const { return {endpoint_.host, port_}; }
    const std::string& name() const { return options_.server_name; }

  private:
    struct Session {
        uint64_t id = 0;
        int fd = -1;
        bool handshaken = false;
        std::atomic<bool> dead{false};
        std::thread thread;

        ~Session();  // closes fd; runs only after the thread is joined
    };

    struct Subscription {
        uint32_t id = 0;
        uint64_t session_id = 0;
        std::set<NodeId> nodes;
        uint64_t next_seq = 1;
    };

    void accept_loop();
    void reap_finished();
    void session_loop(Session* session);
    void handle_frame(Session* session, const wire::Decoded& frame);
    void send_to(Session* session, const wire::Message& m, uint32_t request_id);
    void on_value_change(const NodeId& id, const Value& v);
    void drop_session_subscriptions(uint64_t session_id);

    Endpoint endpoint_;
    AddressSpace space_;
    ServerOptions options_;

    std::map<NodeId, MethodHandler> methods_;
    WriteHook write_hook_;

    int listen_fd_ = -1;
    uint16_t port_ = 0;
    std::atomic<bool> running_{false};
    std::thread acceptor_;

    // One serialization domain: request handling, execute(), hooks and
    // listener dispatch all run under state_mu_.
    std::mutex state_mu_;
    std::mutex sessions_mu_;
    std::vector<std::unique_ptr<Session>> sessions_;
    std::vector<std::unique_ptr<Session>> finished_;  // exited, pending join
    uint64_t next_session_id_ = 1;
    std::vector<Subscription> subscriptions_;
    uint32_t next_subscription_id_ = 1;
};

}  // namespace uarl
