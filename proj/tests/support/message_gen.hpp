#pragma once

// Randomized wire-message generators shared by the codec property tests and
// the acceptance suite.

#include <random>
#include <string>
#include <vector>

#include "uarl/wire.hpp"

namespace testgen {

using namespace uarl;

inline uint32_t ru32(std::mt19937& g) { return g(); }

inline size_t index(std::mt19937& g, size_t n) { return g() % n; }

// Valid UTF-8 with a mix of ASCII and multi-byte codepoints.
inline std::string random_text(std::mt19937& g, size_t max_len = 24) {
    static const std::vector<std::string> pieces = {
        "a", "B", "7", "_", " ", "node", "δ", "σ", "ü", "€", "✓", "中", "𝄞",
    };
    std::string s;
    size_t n = index(g, max_len + 1);
    for (size_t i = 0; i < n; ++i) s += pieces[index(g, pieces.size())];
    return s;
}

inline NodeId random_node_id(std::mt19937& g) {
    uint16_t ns = uint16_t(g() % 4);
    if (g() % 2 == 0) return NodeId::numeric(ns, g() % 100000);
    std::string t = random_text(g, 12);
    if (t.empty()) t = "x";
    return NodeId::text(ns, t);
}

inline Value random_value(std::mt19937& g) {
    switch (g() % 4) {
        case 0: return Value::boolean(g() % 2 == 0);
        case 1: return Value::int32(int32_t(g()));
        case 2: {
            std::uniform_real_distribution<double> d(-1e6, 1e6);
            return Value::real(d(g));
        }
        default: return Value::text(random_text(g));
    }
}

inline RLMarker random_marker(std::mt19937& g) {
    if (g() % 2 == 0) {
        int32_t min = int32_t(g() % 20) - 10;
        int32_t step = 1 + int32_t(g() % 3);
        int32_t max = min + step * int32_t(g() % 6);
        return g() % 2 ? RLMarker::int_action(min, max, step)
                       : RLMarker::int_observation(min, max, step);
    }
    double min = double(int(g() % 100)) / 10.0 - 5.0;
    double step = 0.25 * double(1 + g() % 4);
    double max = min + step * double(g() % 5);
    return g() % 2 ? RLMarker::double_action(min, max, step)
                   : RLMarker::double_observation(min, max, step);
}

inline BrowseEntry random_browse_entry(std::mt19937& g) {
    BrowseEntry e;
    e.ref_type = ReferenceType(g() % 4);
    e.target = random_node_id(g);
    e.browse_name = random_text(g);
    e.node_class = NodeClass(g() % 5);
    if (g() % 2 == 0) e.type_definition = random_node_id(g);
    if (g() % 2 == 0) e.marker = random_marker(g);
    return e;
}

inline wire::Message random_message(std::mt19937& g) {
    switch (g() % 14) {
        case 0: return wire::Hello{uint16_t(g())};
        case 1: return wire::HelloAck{random_text(g)};
        case 2: return wire::BrowseReq{random_node_id(g)};
        case 3: {
            wire::BrowseResp m;
            size_t n = index(g, 6);
            for (size_t i = 0; i < n; ++i) m.entries.push_back(random_browse_entry(g));
            return m;
        }
        case 4: return wire::ReadReq{random_node_id(g)};
        case 5: return wire::ReadResp{random_value(g)};
        case 6: return wire::WriteReq{random_node_id(g), random_value(g)};
        case 7: return wire::WriteResp{uint8_t(g())};
        case 8: {
            wire::CallReq m;
            m.method = random_node_id(g);
            size_t n = index(g, 4);
            for (size_t i = 0; i < n; ++i) m.args.push_back(random_value(g));
            return m;
        }
        case 9: {
            wire::CallResp m;
            m.status = uint8_t(g());
            size_t n = index(g, 4);
            for (size_t i = 0; i < n; ++i) m.results.push_back(random_value(g));
            return m;
        }
        case 10: {
            wire::SubscribeReq m;
            size_t n = index(g, 5);
            for (size_t i = 0; i < n; ++i) m.nodes.push_back(random_node_id(g));
            return m;
        }
        case 11: return wire::SubscribeResp{uint32_t(g())};
        case 12: {
            wire::Notify m;
            m.subscription_id = g();
            m.seq = (uint64_t(g()) << 32) | g();
            m.node = random_node_id(g);
            m.value = random_value(g);
            return m;
        }
        default: return wire::ErrorMsg{uint16_t(g()), random_text(g)};
    }
}

}  // namespace testgen
