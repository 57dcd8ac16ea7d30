#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "uarl/address_space.hpp"

// Binary codec and framing for the node protocol. The byte layout is the
// external interface and is documented bit-exactly in protocol.md.
namespace uarl::wire {

inline constexpr std::array<uint8_t, 4> kMagic{0x55, 0x41, 0x42, 0x4C};  // "UABL"
inline constexpr uint16_t kProtocolVersion = 1;
inline constexpr size_t kHeaderSize = 13;
inline constexpr size_t kMaxListEntries = 0xFFFF;
inline constexpr uint32_t kMaxPayload = 16 * 1024 * 1024;

enum class MsgType : uint8_t {
    Hello = 0x01,
    HelloAck = 0x02,
    BrowseReq = 0x10,
    BrowseResp = 0x11,
    ReadReq = 0x12,
    ReadResp = 0x13,
    WriteReq = 0x14,
    WriteResp = 0x15,
    CallReq = 0x16,
    CallResp = 0x17,
    SubscribeReq = 0x18,
    SubscribeResp = 0x19,
    Notify = 0x20,
    Error = 0x7F,
};

struct Hello {
    uint16_t version = kProtocolVersion;
    bool operator==(const Hello&) const = default;
};
struct HelloAck {
    std::string server_name;
    bool operator==(const HelloAck&) const = default;
};
struct BrowseReq {
    NodeId node;
    bool operator==(const BrowseReq&) const = default;
};
struct BrowseResp {
    std::vector<BrowseEntry> entries;
    bool operator==(const BrowseResp&) const = default;
};
struct ReadReq {
    NodeId node;
    bool operator==(const ReadReq&) const = default;
};
struct ReadResp {
    Value value;
    bool operator==(const ReadResp&) const = default;
};
struct WriteReq {
    NodeId node;
    Value value;
    bool operator==(const WriteReq&) const = default;
};
struct WriteResp {
    uint8_t status = 0;
    bool operator==(const WriteResp&) const = default;
};
struct CallReq {
    NodeId method;
    std::vector<Value> args;
    bool operator==(const CallReq&) const = default;
};
struct CallResp {
    uint8_t status = 0;
    std::vector<Value> results;
    bool operator==(const CallResp&) const = default;
};
struct SubscribeReq {
    std::vector<NodeId> nodes;
    bool operator==(const SubscribeReq&) const = default;
};
struct SubscribeResp {
    uint32_t subscription_id = 0;
    bool operator==(const SubscribeResp&) const = default;
};
struct Notify {
    uint32_t subscription_id = 0;
    uint64_t seq = 0;
    NodeId node;
    Value value;
    bool operator==(const Notify&) const = default;
};
struct ErrorMsg {
    uint16_t code = 0;
    std::string text;
    bool operator==(const ErrorMsg&) const = default;
};

using Message = std::variant<Hello, HelloAck, BrowseReq, BrowseResp, ReadReq,
                             ReadResp, WriteReq, WriteResp, CallReq, CallResp,
                             SubscribeReq, SubscribeResp, Notify, ErrorMsg>;

MsgType msg_type_of(const Message& m);

enum class WireErrc {
    BadMagic,
    UnknownType,
    Truncated,
    TrailingBytes,
    BadUtf8,
    BadValue,
    Oversize,
};

const char* wire_errc_name(WireErrc c);

class WireError : public std::runtime_error {
  public:
    WireError(WireErrc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    WireErrc code() const { return code_; }

  private:
    WireErrc code_;
};

/// Serializes one frame: 13-byte header plus payload, all integers
/// little-endian. Throws Oversize for lists over 65535 entries and BadUtf8
/// for invalid text.
std::vector<uint8_t> encode(const Message& m, uint32_t request_id);

struct Decoded {
    Message message;
    uint32_t request_id = 0;
};

/// Parses exactly one frame; the inverse of encode on valid input. Throws
/// WireError (never crashes) on malformed input.
Decoded decode(std::span<const uint8_t> bytes);

bool valid_utf8(std::string_view s);

/// Incremental frame parser over an arbitrary chunking of the byte stream.
/// After the first error the reader is poisoned and keeps rethrowing.
class FrameReader {
  public:
    void feed(std::span<const uint8_t> chunk);

    /// Next complete frame, or nullopt if more bytes are needed.
    std::optional<Decoded> next();

    bool poisoned() const { return poisoned_; }

  private:
    std::vector<uint8_t> buf_;
    size_t pos_ = 0;  // consumed prefix of buf_
    bool poisoned_ = false;
    std::optional<std::pair<WireErrc, std::string>> error_;
};

}  // namespace uarl::wire
