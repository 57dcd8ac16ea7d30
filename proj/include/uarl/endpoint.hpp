#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace uarl {

struct Endpoint {
    std::string host = "127.0.0.1";
    uint16_t port = 0;

    std::string to_string() const { return host + ":" + std::to_string(port); }
};

/// Parses "host:port". IPv4 literals and "localhost" only.
inline Endpoint parse_endpoint(const std::string& s) {
    auto colon = s.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
        throw std::invalid_argument("endpoint must be host:port: " + s);
    Endpoint ep;
    ep.host = s.substr(0, colon);
    if (ep.host == "localhost") ep.host = "127.0.0.1";
    unsigned long port = 0;
    for (size_t i = colon + 1; i < s.size(); ++i) {
        char c = s[i];
        if (c < '0' || c > '9')
            throw std::invalid_argument("endpoint port is not a number: " + s);
        port = port * 10 + unsigned(c - '0');
        if (port > 65535) throw std::invalid_argument("endpoint port out of range: " + s);
    }
    ep.port = uint16_t(port);
    return ep;
}

}  // namespace uarl
