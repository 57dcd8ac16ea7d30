#include "uarl/server.hpp"

#include <poll.h>

#include "socket_io.hpp"
#include "uarl/log.hpp"

namespace uarl {

using wire::Message;

Server::Server(Endpoint endpoint, AddressSpace space, ServerOptions options)
    : endpoint_(std::move(endpoint)), space_(std::move(space)), options_(std::move(options)) {
    space_.add_change_listener(
        [this](const NodeId& id, const Value& v) { on_value_change(id, v); });
}

Server::~Server() { stop(); }

Server::Session::~Session() {
    if (fd >= 0) ::close(fd);
}

void Server::add_method(const NodeId& method, MethodHandler handler) {
    const Node& node = space_.at(method);  // throws NoSuchNode
    if (node.node_class != NodeClass::Method)
        throw SpaceError(SpaceErrc::NotAVariable,
                         "method handler target is not a Method node: " + method.to_string());
    methods_[method] = std::move(handler);
}

void Server::set_write_hook(WriteHook hook) { write_hook_ = std::move(hook); }

void Server::start() {
    std::string err;
    listen_fd_ = net::tcp_listen(endpoint_, &err);
    if (listen_fd_ < 0)
        throw BindError("cannot bind " + endpoint_.to_string() + ": " + err);
    port_ = endpoint_.port != 0 ? endpoint_.port : net::local_port(listen_fd_);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
    log::debug("server %s listening on %s:%u", options_.server_name.c_str(),
               endpoint_.host.c_str(), unsigned(port_));
}

void Server::stop() {
    if (!running_.exchange(false)) {
        if (acceptor_.joinable()) acceptor_.join();
        return;
    }
    ::shutdown(listen_fd_, SHUT_RDWR);
    if (acceptor_.joinable()) acceptor_.join();
    ::close(listen_fd_);
    listen_fd_ = -1;

    std::vector<std::unique_ptr<Session>> active, finished;
    {
        std::lock_guard lk(sessions_mu_);
        active.swap(sessions_);
        finished.swap(finished_);
    }
    for (auto& s : active) ::shutdown(s->fd, SHUT_RDWR);
    for (auto& s : active)
        if (s->thread.joinable()) s->thread.join();
    for (auto& s : finished)
        if (s->thread.joinable()) s->thread.join();
}

void Server::execute(const std::function<void(AddressSpace&)>& fn) {
    std::lock_guard lk(state_mu_);
    fn(space_);
}

void Server::accept_loop() {
    while (running_) {
        reap_finished();
        pollfd pfd{listen_fd_, POLLIN, 0};
        int r = ::poll(&pfd, 1, 200);
        if (!running_) break;
        if (r <= 0) continue;
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        net::set_nodelay(fd);
        auto session = std::make_unique<Session>();
        session->fd = fd;
        Session* raw = session.get();
        {
            std::lock_guard lk(sessions_mu_);
            session->id = next_session_id_++;
            sessions_.push_back(std::move(session));
        }
        raw->thread = std::thread([this, raw] { session_loop(raw); });
    }
}

void Server::reap_finished() {
    std::vector<std::unique_ptr<Session>> done;
    {
        std::lock_guard lk(sessions_mu_);
        done.swap(finished_);
    }
    for (auto& s : done)
        if (s->thread.joinable()) s->thread.join();
}

void Server::session_loop(Session* session) {
    wire::FrameReader reader;
    uint8_t buf[4096];
    for (;;) {
        ssize_t n = net::recv_some(session->fd, buf, sizeof(buf));
        if (n <= 0) break;
        try {
            reader.feed(std::span(buf, size_t(n)));
            while (auto frame = reader.next()) handle_frame(session, *frame);
        } catch (const wire::WireError& e) {
            std::lock_guard lk(state_mu_);
            send_to(session, wire::ErrorMsg{errcode::bad_request, e.what()}, 0);
            break;
        }
        if (session->dead) break;
    }
    {
        std::lock_guard lk(state_mu_);
        drop_session_subscriptions(session->id);
    }
    session->dead = true;
    // Retire ourselves; the fd is closed by the Session destructor after the
    // acceptor (or stop()) joins this thread, so it closes exactly once and
    // never while another thread could still address it.
    std::lock_guard lk(sessions_mu_);
    for (auto it = sessions_.begin(); it != sessions_.end(); ++it) {
        if (it->get() == session) {
            finished_.push_back(std::move(*it));
            sessions_.erase(it);
            break;
        }
    }
}

void Server::send_to(Session* session, const Message& m, uint32_t request_id) {
    if (session->dead) return;
    auto frame = wire::encode(m, request_id);
    if (!net::send_all(session->fd, frame.data(), frame.size()))
        session->dead = true;  // subscriptions are reaped when its loop exits
}

void Server::on_value_change(const NodeId& id, const Value& v) {
    // Runs inside the serialization domain (set_value is only reached from
    // under state_mu_), so subscription state and socket writes are safe.
    for (auto& sub : subscriptions_) {
        if (!sub.nodes.contains(id)) continue;
        Session* target = nullptr;
        {
            std::lock_guard lk(sessions_mu_);
            for (auto& s : sessions_)
                if (s->id == sub.session_id) target = s.get();
        }
        if (!target || target->dead) continue;
        wire::Notify notify{sub.id, sub.next_seq++, id, v};
        send_to(target, notify, 0);
    }
}

void Server::drop_session_subscriptions(uint64_t session_id) {
    std::erase_if(subscriptions_,
                  [&](const Subscription& s) { return s.session_id == session_id; });
}

void Server::handle_frame(Session* session, const wire::Decoded& frame) {
    std::lock_guard lk(state_mu_);
    const uint32_t rid = frame.request_id;

    if (!session->handshaken) {
        if (const auto* hello = std::get_if<wire::Hello>(&frame.message)) {
            if (hello->version != wire::kProtocolVersion) {
                send_to(session, wire::ErrorMsg{errcode::bad_version, "unsupported protocol version"}, rid);
                session->dead = true;
                return;
            }
            session->handshaken = true;
            send_to(session, wire::HelloAck{options_.server_name}, rid);
        } else {
            send_to(session, wire::ErrorMsg{errcode::bad_request, "handshake required"}, rid);
            session->dead = true;
        }
        return;
    }

    std::visit(
        [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, wire::BrowseReq>) {
                try {
                    send_to(session, wire::BrowseResp{space_.browse(msg.node)}, rid);
                } catch (const SpaceError& e) {
                    send_to(session, wire::ErrorMsg{errcode::no_such_node, e.what()}, rid);
                }
            } else if constexpr (std::is_same_v<T, wire::ReadReq>) {
                const Node* node = space_.find(msg.node);
                if (!node)
                    send_to(session, wire::ErrorMsg{errcode::no_such_node, "no such node"}, rid);
                else if (!node->value)
                    send_to(session, wire::ErrorMsg{errcode::no_value, "node has no value"}, rid);
                else
                    send_to(session, wire::ReadResp{*node->value}, rid);
            } else if constexpr (std::is_same_v<T, wire::WriteReq>) {
                uint8_t status = 0;
                try {
                    space_.set_value(msg.node, msg.value);
                    if (write_hook_) {
                        try {
                            write_hook_(space_, msg.node, msg.value);
                        } catch (const std::exception& e) {
                            log::warn("write hook failed: %s", e.what());
                        }
                    }
                } catch (const SpaceError& e) {
                    switch (e.code()) {
                        case SpaceErrc::NoSuchNode: status = 1; break;
                        case SpaceErrc::TypeMismatch:
                        case SpaceErrc::NotAVariable: status = 2; break;
                        case SpaceErrc::ValueOutOfRange: status = 3; break;
                        default: status = 2; break;
                    }
                }
                // any Notify frames triggered above are already on the wire
                send_to(session, wire::WriteResp{status}, rid);
            } else if constexpr (std::is_same_v<T, wire::CallReq>) {
                auto it = methods_.find(msg.method);
                if (it == methods_.end()) {
                    send_to(session, wire::CallResp{1, {}}, rid);
                    return;
                }
                wire::CallResp resp;
                try {
                    auto [status, results] = it->second(space_, msg.args);
                    resp.status = status;
                    resp.results = std::move(results);
                } catch (const std::exception& e) {
                    resp.status = 4;
                    resp.results = {Value::text(e.what())};
                }
                send_to(session, resp, rid);
            } else if constexpr (std::is_same_v<T, wire::SubscribeReq>) {
                for (const auto& node : msg.nodes) {
                    if (!space_.find(node)) {
                        send_to(session, wire::ErrorMsg{errcode::no_such_node,
                                                        "cannot subscribe: " + node.to_string()},
                                rid);
                        return;
                    }
                }
                Subscription sub;
                sub.id = next_subscription_id_++;
                sub.session_id = session->id;
                sub.nodes.insert(msg.nodes.begin(), msg.nodes.end());
                subscriptions_.push_back(std::move(sub));
                send_to(session, wire::SubscribeResp{subscriptions_.back().id}, rid);
            } else if constexpr (std::is_same_v<T, wire::Hello>) {
                send_to(session, wire::ErrorMsg{errcode::bad_request, "already handshaken"}, rid);
            } else {
                send_to(session, wire::ErrorMsg{errcode::bad_request, "unexpected message"}, rid);
            }
        },
        frame.message);
}

}  // namespace uarl
