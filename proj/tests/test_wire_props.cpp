#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support/message_gen.hpp"
#include "uarl/wire.hpp"

using namespace uarl;
using namespace uarl::wire;

TEST_CASE("round-trip: decode(encode(m)) == m over randomized messages") {
    std::mt19937 g(20260810);
    for (int i = 0; i < 2000; ++i) {
        Message m = testgen::random_message(g);
        uint32_t id = g();
        auto frame = encode(m, id);
        auto d = decode(frame);
        CHECK(d.request_id == id);
        CHECK(d.message == m);
    }
}

TEST_CASE("fragmentation invariance: any chunking yields the same sequence") {
    std::mt19937 g(42);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Message> msgs;
        std::vector<uint8_t> stream;
        size_t n = 1 + g() % 8;
        for (size_t i = 0; i < n; ++i) {
            msgs.push_back(testgen::random_message(g));
            auto f = encode(msgs.back(), uint32_t(i + 1));
            stream.insert(stream.end(), f.begin(), f.end());
        }

        FrameReader r;
        std::vector<Message> got;
        size_t pos = 0;
        while (pos < stream.size()) {
            size_t chunk = 1 + g() % 37;
            chunk = std::min(chunk, stream.size() - pos);
            r.feed(std::span(stream.data() + pos, chunk));
            pos += chunk;
            while (auto d = r.next()) got.push_back(d->message);
        }
        REQUIRE(got.size() == msgs.size());
        for (size_t i = 0; i < msgs.size(); ++i) CHECK(got[i] == msgs[i]);
    }
}

TEST_CASE("fuzz: random byte strings never crash the decoder") {
    std::mt19937 g(777);
    int decoded = 0, rejected = 0;
    for (int i = 0; i < 10000; ++i) {
        size_t len = g() % 64;
        std::vector<uint8_t> junk(len);
        for (auto& b : junk) b = uint8_t(g());
        // half the trials start with valid magic to reach deeper code paths
        if (g() % 2 == 0)
            for (size_t k = 0; k < kMagic.size() && k < junk.size(); ++k)
                junk[k] = kMagic[k];
        try {
            decode(junk);
            ++decoded;
        } catch (const WireError&) {
            ++rejected;
        }
    }
    CHECK(decoded + rejected == 10000);
    CHECK(rejected > 0);
}

TEST_CASE("fuzz: truncated and bit-flipped real frames never crash") {
    std::mt19937 g(1234);
    for (int i = 0; i < 3000; ++i) {
        auto frame = encode(testgen::random_message(g), g());
        if (!frame.empty() && g() % 2 == 0) frame.resize(g() % frame.size());
        if (!frame.empty()) frame[g() % frame.size()] ^= uint8_t(1 << (g() % 8));
        try {
            (void)decode(frame);
        } catch (const WireError&) {
        }

        FrameReader r;
        try {
            r.feed(frame);
            while (r.next()) {
            }
        } catch (const WireError&) {
        }
    }
}
