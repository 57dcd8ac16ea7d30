#include "uarl/client.hpp"

#include <map>
#include <set>

#include "socket_io.hpp"
#include "uarl/log.hpp"

namespace uarl {

std::unique_ptr<ClientSession> ClientSession::connect(const Endpoint& ep,
                                                      ClientOptions options) {
    std::string err;
    int fd = net::tcp_connect(ep, &err);
    if (fd < 0) throw TransportError("connect " + ep.to_string() + ": " + err);

    auto session = std::unique_ptr<ClientSession>(new ClientSession());
    session->fd_ = fd;

    // Handshake runs synchronously before the reader thread exists.
    auto hello = wire::encode(wire::Hello{options.version}, session->next_request_id_++);
    if (!net::send_all(fd, hello.data(), hello.size()))
        throw TransportError("handshake send failed");
    wire::FrameReader reader;
    uint8_t buf[1024];
    for (;;) {
        ssize_t n = net::recv_some(fd, buf, sizeof(buf));
        if (n <= 0) throw TransportError("connection closed during handshake");
        std::optional<wire::Decoded> frame;
        try {
            reader.feed(std::span(buf, size_t(n)));
            frame = reader.next();
        } catch (const wire::WireError& e) {
            throw ProtocolError(0, std::string("handshake: ") + e.what());
        }
        if (!frame) continue;
        if (const auto* ack = std::get_if<wire::HelloAck>(&frame->message)) {
            session->server_name_ = ack->server_name;
            break;
        }
        if (const auto* err_msg = std::get_if<wire::ErrorMsg>(&frame->message))
            throw ProtocolError(err_msg->code, err_msg->text);
        throw ProtocolError(0, "unexpected handshake reply");
    }

    session->reader_ = std::thread([raw = session.get()] { raw->reader_loop(); });
    return session;
}

ClientSession::~ClientSession() { close(); }

void ClientSession::close() {
    {
        std::lock_guard lk(mu_);
        if (fd_ < 0) return;
        ::shutdown(fd_, SHUT_RDWR);
    }
    if (reader_.joinable()) reader_.join();
    std::lock_guard lk(mu_);
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
    if (!down_) {
        down_ = true;
        down_reason_ = "session closed";
    }
    cv_.notify_all();
}

void ClientSession::fail_transport(const std::string& why) {
    std::lock_guard lk(mu_);
    if (!down_) {
        down_ = true;
        down_reason_ = why;
    }
    cv_.notify_all();
}

void ClientSession::reader_loop() {
    wire::FrameReader reader;
    uint8_t buf[4096];
    for (;;) {
        ssize_t n = net::recv_some(fd_, buf, sizeof(buf));
        if (n <= 0) {
            fail_transport("connection closed");
            return;
        }
        try {
            reader.feed(std::span(buf, size_t(n)));
            while (auto frame = reader.next()) {
                if (const auto* notify = std::get_if<wire::Notify>(&frame->message)) {
                    std::lock_guard lk(mu_);
                    notifications_.push_back(Notification{
                        notify->subscription_id, notify->seq, notify->node, notify->value});
                    cv_.notify_all();
                } else {
                    std::lock_guard lk(mu_);
                    response_ = std::move(*frame);
                    cv_.notify_all();
                }
            }
        } catch (const wire::WireError& e) {
            fail_transport(std::string("wire error: ") + e.what());
            return;
        }
    }
}

wire::Message ClientSession::request(const wire::Message& m) {
    uint32_t rid;
    {
        std::lock_guard lk(mu_);
        if (down_) throw TransportError(down_reason_);
        rid = next_request_id_++;
        response_.reset();
    }
    auto frame = wire::encode(m, rid);
    if (!net::send_all(fd_, frame.data(), frame.size())) {
        fail_transport("send failed");
        throw TransportError("send failed");
    }
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return down_ || (response_ && response_->request_id == rid); });
    if (!response_ || response_->request_id != rid)
        throw TransportError(down_reason_.empty() ? "connection lost" : down_reason_);
    wire::Message reply = std::move(response_->message);
    response_.reset();
    if (const auto* err = std::get_if<wire::ErrorMsg>(&reply))
        throw ProtocolError(err->code, err->text);
    return reply;
}

std::vector<BrowseEntry> ClientSession::browse(const NodeId& node) {
    auto reply = request(wire::BrowseReq{node});
    if (auto* resp = std::get_if<wire::BrowseResp>(&reply)) return std::move(resp->entries);
    throw ProtocolError(0, "unexpected reply to browse");
}

std::vector<CatalogEntry> ClientSession::browse_all() {
    // Sorted by NodeId so the catalog order equals the server's iteration
    // order over the reachable nodes.
    std::map<NodeId, CatalogEntry> catalog;
    NodeId root = wellknown::objects;
    catalog[root] = CatalogEntry{root, "Objects", NodeClass::Object, {}, {}};

    std::deque<NodeId> frontier{root};
    std::set<NodeId> visited{root};
    while (!frontier.empty()) {
        NodeId current = frontier.front();
        frontier.pop_front();
        for (auto& entry : browse(current)) {
            if (entry.ref_type == ReferenceType::HasTypeDefinition) continue;
            auto it = catalog.find(entry.target);
            if (it == catalog.end()) {
                catalog[entry.target] =
                    CatalogEntry{entry.target, entry.browse_name, entry.node_class,
                                 entry.type_definition, entry.marker};
            }
            if (visited.insert(entry.target).second) frontier.push_back(entry.target);
        }
    }

    std::vector<CatalogEntry> out;
    out.reserve(catalog.size());
    for (auto& [id, e] : catalog) out.push_back(std::move(e));
    return out;
}

Value ClientSession::read(const NodeId& node) {
    auto reply = request(wire::ReadReq{node});
    if (auto* resp = std::get_if<wire::ReadResp>(&reply)) return std::move(resp->value);
    throw ProtocolError(0, "unexpected reply to read");
}

uint8_t ClientSession::write(const NodeId& node, const Value& value) {
    auto reply = request(wire::WriteReq{node, value});
    if (auto* resp = std::get_if<wire::WriteResp>(&reply)) return resp->status;
    throw ProtocolError(0, "unexpected reply to write");
}

std::pair<uint8_t, std::vector<Value>> ClientSession::call(const NodeId& method,
                                                           std::vector<Value> args) {
    auto reply = request(wire::CallReq{method, std::move(args)});
    if (auto* resp = std::get_if<wire::CallResp>(&reply))
        return {resp->status, std::move(resp->results)};
    throw ProtocolError(0, "unexpected reply to call");
}

uint32_t ClientSession::subscribe(const std::vector<NodeId>& nodes) {
    auto reply = request(wire::SubscribeReq{nodes});
    if (auto* resp = std::get_if<wire::SubscribeResp>(&reply)) return resp->subscription_id;
    throw ProtocolError(0, "unexpected reply to subscribe");
}

std::optional<ClientSession::Notification> ClientSession::await_notification(
    std::chrono::milliseconds timeout) {
    std::unique_lock lk(mu_);
    cv_.wait_for(lk, timeout, [&] { return down_ || !notifications_.empty(); });
    if (!notifications_.empty()) {
        Notification n = std::move(notifications_.front());
        notifications_.pop_front();
        return n;
    }
    if (down_) throw TransportError(down_reason_);
    return std::nullopt;
}

std::optional<ClientSession::Notification> ClientSession::try_pop_notification() {
    std::lock_guard lk(mu_);
    if (notifications_.empty()) return std::nullopt;
    Notification n = std::move(notifications_.front());
    notifications_.pop_front();
    return n;
}

size_t ClientSession::pending_notifications() const {
    std::lock_guard lk(mu_);
    return notifications_.size();
}

}  // namespace uarl
