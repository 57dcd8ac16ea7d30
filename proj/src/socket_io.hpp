#pragma once

// Internal POSIX socket helpers shared by server.cpp and client.cpp.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdint>
#include <cstring>
#include <string>

#include "uarl/endpoint.hpp"

namespace uarl::net {

inline void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

inline bool make_addr(const Endpoint& ep, sockaddr_in* addr, std::string* err) {
    std::memset(addr, 0, sizeof(*addr));
    addr->sin_family = AF_INET;
    addr->sin_port = htons(ep.port);
    if (::inet_pton(AF_INET, ep.host.c_str(), &addr->sin_addr) != 1) {
        if (err) *err = "not an IPv4 address: " + ep.host;
        return false;
    }
    return true;
}

inline int tcp_listen(const Endpoint& ep, std::string* err) {
    sockaddr_in addr;
    if (!make_addr(ep, &addr, err)) return -1;
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) {
        if (err) *err = std::strerror(errno);
        return -1;
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(fd, 16) != 0) {
        if (err) *err = std::strerror(errno);
        ::close(fd);
        return -1;
    }
    return fd;
}

inline int tcp_connect(const Endpoint& ep, std::string* err) {
    sockaddr_in addr;
    if (!make_addr(ep, &addr, err)) return -1;
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) {
        if (err) *err = std::strerror(errno);
        return -1;
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        if (err) *err = std::strerror(errno);
        ::close(fd);
        return -1;
    }
    set_nodelay(fd);
    return fd;
}

inline uint16_t local_port(int fd) {
    sockaddr_in addr;
    socklen_t len = sizeof(addr);
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return 0;
    return ntohs(addr.sin_port);
}

inline bool send_all(int fd, const uint8_t* data, size_t n) {
    size_t sent = 0;
    while (sent < n) {
        ssize_t k = ::send(fd, data + sent, n - sent, MSG_NOSIGNAL);
        if (k <= 0) {
            if (k < 0 && errno == EINTR) continue;
            return false;
        }
        sent += size_t(k);
    }
    return true;
}

inline ssize_t recv_some(int fd, uint8_t* buf, size_t n) {
    for (;;) {
        ssize_t k = ::recv(fd, buf, n, 0);
        if (k < 0 && errno == EINTR) continue;
        return k;
    }
}

}  // namespace uarl::net
