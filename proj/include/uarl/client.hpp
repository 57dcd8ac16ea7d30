#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "uarl/address_space.hpp"
#include "uarl/endpoint.hpp"
#include "uarl/wire.hpp"

namespace uarl {

class TransportError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A server-side Error frame or an out-of-contract reply.
class ProtocolError : public std::runtime_error {
  public:
    ProtocolError(uint16_t code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    uint16_t code() const { return code_; }

  private:
    uint16_t code_ = 0;
};

/// A mirrored node descriptor assembled from browsing.
struct CatalogEntry {
    NodeId id;
    std::string browse_name;
    NodeClass node_class = NodeClass::Object;
    std::optional<NodeId> type_definition;
    std::optional<RLMarker> marker;

    bool operator==(const CatalogEntry&) const = default;
};

/// Connecting side of the protocol. Requests are synchronous and correlated
/// by strictly increasing request ids; a background reader feeds the
/// notification queue, so notifications arriving during a request are queued,
/// never lost. Single-owner.
struct ClientOptions {
    uint16_t version = wire::kProtocolVersion;  // test hook
};

class ClientSession {
  public:
    static std::unique_ptr<ClientSession> connect(const Endpoint& ep,
                                                  ClientOptions options = {});
    ~ClientSession();

    ClientSession(const ClientSession&) = delete;
    ClientSession& operator=(const ClientSession&) = delete;

    const std::string& server_name() const { return server_name_; }

    std::vector<BrowseEntry> browse(const NodeId& node);

    /// Breadth-first mirror of the server's address space starting at the
    /// Objects folder, ordered like the server's own node iteration.
    /// HasTypeDefinition targets (type metadata) are not descended into.
    std::vector<CatalogEntry> browse_all();

    Value read(const NodeId& node);
    uint8_t write(const NodeId& node, const Value& value);
    std::pair<uint8_t, std::vector<Value>> call(const NodeId& method,
                                                std::vector<Value> args);
    uint32_t subscribe(const std::vector<NodeId>& nodes);

    struct Notification {
        uint32_t subscription_id = 0;
        uint64_t seq = 0;
        NodeId node;
        Value value;
    };

    /// Oldest queued notification, or nullopt after the timeout.
    std::optional<Notification> await_notification(std::chrono::milliseconds timeout);
    std::optional<Notification> try_pop_notification();
    size_t pending_notifications() const;

    void close();

  private:
    ClientSession() = default;

    wire::Message request(const wire::Message& m);
    void reader_loop();
    void fail_transport(const std::string& why);

    int fd_ = -1;
    std::string server_name_;
    std::thread reader_;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    uint32_t next_request_id_ = 1;
    std::optional<wire::Decoded> response_;
    bool down_ = false;
    std::string down_reason_;
    std::deque<Notification> notifications_;
};

}  // namespace uarl
