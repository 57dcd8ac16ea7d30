#include "uarl/wire.hpp"

#include <cmath>
#include <cstring>

namespace uarl::wire {

namespace {

// --- writer ---------------------------------------------------------------

class Writer {
  public:
    void u8(uint8_t v) { out_.push_back(v); }
    void u16(uint16_t v) {
        out_.push_back(uint8_t(v));
        out_.push_back(uint8_t(v >> 8));
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(uint8_t(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(uint8_t(v >> (8 * i)));
    }
    void i32(int32_t v) { u32(uint32_t(v)); }
    void f64(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void str(const std::string& s) {
        if (!valid_utf8(s))
            throw WireError(WireErrc::BadUtf8, "text is not valid UTF-8");
        if (s.size() > 0xFFFFFFFFu)
            throw WireError(WireErrc::Oversize, "text too long");
        u32(uint32_t(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }
    void node_id(const NodeId& id) {
        u16(id.ns);
        if (id.is_numeric()) {
            u8(0);
            u32(id.numeric_id());
        } else {
            u8(1);
            str(id.text_id());
        }
    }
    void value(const Value& v) {
        u8(uint8_t(v.type()));
        switch (v.type()) {
            case ValueType::Bool: u8(v.as_bool() ? 1 : 0); break;
            case ValueType::Int32: i32(v.as_int32()); break;
            case ValueType::Double: f64(v.as_double()); break;
            case ValueType::Text: str(v.as_text()); break;
        }
    }
    template <typename T, typename Fn>
    void list(const std::vector<T>& items, Fn&& each) {
        if (items.size() > kMaxListEntries)
            throw WireError(WireErrc::Oversize, "list exceeds 65535 entries");
        u16(uint16_t(items.size()));
        for (const auto& it : items) each(it);
    }

    std::vector<uint8_t> take() { return std::move(out_); }

  private:
    std::vector<uint8_t> out_;
};

// --- reader ---------------------------------------------------------------

class Reader {
  public:
    explicit Reader(std::span<const uint8_t> data) : data_(data) {}

    uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = uint16_t(data_[pos_]) | uint16_t(data_[pos_ + 1]) << 8;
        pos_ += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    int32_t i32() { return int32_t(u32()); }
    double f64() {
        uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str() {
        uint32_t len = u32();
        need(len);
        std::string s(reinterpret_cast<const char*>(data_.data() + pos_), len);
        pos_ += len;
        if (!valid_utf8(s))
            throw WireError(WireErrc::BadUtf8, "text is not valid UTF-8");
        return s;
    }
    NodeId node_id() {
        uint16_t ns = u16();
        uint8_t tag = u8();
        if (tag == 0) return NodeId::numeric(ns, u32());
        if (tag == 1) {
            std::string s = str();
            if (s.empty())
                throw WireError(WireErrc::BadValue, "empty text node identifier");
            return NodeId{ns, std::move(s)};
        }
        throw WireError(WireErrc::BadValue, "unknown node id tag");
    }
    Value value() {
        uint8_t tag = u8();
        switch (tag) {
            case 0: return Value::boolean(u8() != 0);
            case 1: return Value::int32(i32());
            case 2: {
                double d = f64();
                if (!std::isfinite(d))
                    throw WireError(WireErrc::BadValue, "non-finite Double payload");
                return Value::real(d);
            }
            case 3: return Value::text(str());
        }
        throw WireError(WireErrc::BadValue, "unknown value tag");
    }
    size_t remaining() const { return data_.size() - pos_; }

  private:
    void need(size_t n) {
        if (remaining() < n)
            throw WireError(WireErrc::Truncated, "payload ends mid-field");
    }

    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

ReferenceType ref_type_from(uint8_t v) {
    if (v > uint8_t(ReferenceType::HasTypeDefinition))
        throw WireError(WireErrc::BadValue, "unknown reference type");
    return ReferenceType(v);
}

NodeClass node_class_from(uint8_t v) {
    if (v > uint8_t(NodeClass::Property))
        throw WireError(WireErrc::BadValue, "unknown node class");
    return NodeClass(v);
}

MarkerKind marker_kind_from(uint8_t v) {
    if (v > uint8_t(MarkerKind::DoubleAction))
        throw WireError(WireErrc::BadValue, "unknown marker kind");
    return MarkerKind(v);
}

void write_browse_entry(Writer& w, const BrowseEntry& e) {
    w.u8(uint8_t(e.ref_type));
    w.node_id(e.target);
    w.str(e.browse_name);
    w.u8(uint8_t(e.node_class));
    w.u8(e.type_definition ? 1 : 0);
    if (e.type_definition) w.node_id(*e.type_definition);
    w.u8(e.marker ? 1 : 0);
    if (e.marker) {
        w.u8(uint8_t(e.marker->kind));
        w.f64(e.marker->min);
        w.f64(e.marker->max);
        w.f64(e.marker->step);
    }
}

BrowseEntry read_browse_entry(Reader& r) {
    BrowseEntry e;
    e.ref_type = ref_type_from(r.u8());
    e.target = r.node_id();
    e.browse_name = r.str();
    e.node_class = node_class_from(r.u8());
    if (r.u8() != 0) e.type_definition = r.node_id();
    if (r.u8() != 0) {
        RLMarker m;
        m.kind = marker_kind_from(r.u8());
        m.min = r.f64();
        m.max = r.f64();
        m.step = r.f64();
        if (!(std::isfinite(m.min) && std::isfinite(m.max) && std::isfinite(m.step)))
            throw WireError(WireErrc::BadValue, "non-finite marker bound");
        e.marker = m;
    }
    return e;
}

template <typename T>
std::vector<T> read_list(Reader& r, T (*each)(Reader&)) {
    uint16_t n = r.u16();
    std::vector<T> out;
    out.reserve(n);
    for (uint16_t i = 0; i < n; ++i) out.push_back(each(r));
    return out;
}

Value read_value(Reader& r) { return r.value(); }
NodeId read_node_id(Reader& r) { return r.node_id(); }

void write_payload(Writer& w, const Message& m) {
    std::visit(
        [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, Hello>) {
                w.u16(msg.version);
            } else if constexpr (std::is_same_v<T, HelloAck>) {
                w.str(msg.server_name);
            } else if constexpr (std::is_same_v<T, BrowseReq>) {
                w.node_id(msg.node);
            } else if constexpr (std::is_same_v<T, BrowseResp>) {
                w.list(msg.entries, [&](const BrowseEntry& e) { write_browse_entry(w, e); });
            } else if constexpr (std::is_same_v<T, ReadReq>) {
                w.node_id(msg.node);
            } else if constexpr (std::is_same_v<T, ReadResp>) {
                w.value(msg.value);
            } else if constexpr (std::is_same_v<T, WriteReq>) {
                w.node_id(msg.node);
                w.value(msg.value);
            } else if constexpr (std::is_same_v<T, WriteResp>) {
                w.u8(msg.status);
            } else if constexpr (std::is_same_v<T, CallReq>) {
                w.node_id(msg.method);
                w.list(msg.args, [&](const Value& v) { w.value(v); });
            } else if constexpr (std::is_same_v<T, CallResp>) {
                w.u8(msg.status);
                w.list(msg.results, [&](const Value& v) { w.value(v); });
            } else if constexpr (std::is_same_v<T, SubscribeReq>) {
                w.list(msg.nodes, [&](const NodeId& n) { w.node_id(n); });
            } else if constexpr (std::is_same_v<T, SubscribeResp>) {
                w.u32(msg.subscription_id);
            } else if constexpr (std::is_same_v<T, Notify>) {
                w.u32(msg.subscription_id);
                w.u64(msg.seq);
                w.node_id(msg.node);
                w.value(msg.value);
            } else if constexpr (std::is_same_v<T, ErrorMsg>) {
                w.u16(msg.code);
                w.str(msg.text);
            }
        },
        m);
}

Message read_payload(MsgType type, Reader& r) {
    switch (type) {
        case MsgType::Hello: return Hello{r.u16()};
        case MsgType::HelloAck: return HelloAck{r.str()};
        case MsgType::BrowseReq: return BrowseReq{r.node_id()};
        case MsgType::BrowseResp: return BrowseResp{read_list(r, +[](Reader& rr) { return read_browse_entry(rr); })};
        case MsgType::ReadReq: return ReadReq{r.node_id()};
        case MsgType::ReadResp: return ReadResp{r.value()};
        case MsgType::WriteReq: {
            WriteReq m{r.node_id(), r.value()};
            return m;
        }
        case MsgType::WriteResp: return WriteResp{r.u8()};
        case MsgType::CallReq: {
            CallReq m;
            m.method = r.node_id();
            m.args = read_list(r, read_value);
            return m;
        }
        case MsgType::CallResp: {
            CallResp m;
            m.status = r.u8();
            m.results = read_list(r, read_value);
            return m;
        }
        case MsgType::SubscribeReq: return SubscribeReq{read_list(r, read_node_id)};
        case MsgType::SubscribeResp: return SubscribeResp{r.u32()};
        case MsgType::Notify: {
            Notify m;
            m.subscription_id = r.u32();
            m.seq = r.u64();
            m.node = r.node_id();
            m.value = r.value();
            return m;
        }
        case MsgType::Error: {
            ErrorMsg m;
            m.code = r.u16();
            m.text = r.str();
            return m;
        }
    }
    throw WireError(WireErrc::UnknownType, "unknown message type");
}

bool known_msg_type(uint8_t t) {
    switch (MsgType(t)) {
        case MsgType::Hello:
        case MsgType::HelloAck:
        case MsgType::BrowseReq:
        case MsgType::BrowseResp:
        case MsgType::ReadReq:
        case MsgType::ReadResp:
        case MsgType::WriteReq:
        case MsgType::WriteResp:
        case MsgType::CallReq:
        case MsgType::CallResp:
        case MsgType::SubscribeReq:
        case MsgType::SubscribeResp:
        case MsgType::Notify:
        case MsgType::Error:
            return true;
    }
    return false;
}

}  // namespace

MsgType msg_type_of(const Message& m) {
    static constexpr MsgType table[] = {
        MsgType::Hello,       MsgType::HelloAck,    MsgType::BrowseReq,
        MsgType::BrowseResp,  MsgType::ReadReq,     MsgType::ReadResp,
        MsgType::WriteReq,    MsgType::WriteResp,   MsgType::CallReq,
        MsgType::CallResp,    MsgType::SubscribeReq, MsgType::SubscribeResp,
        MsgType::Notify,      MsgType::Error,
    };
    return table[m.index()];
}

const char* wire_errc_name(WireErrc c) {
    switch (c) {
        case WireErrc::BadMagic: return "BadMagic";
        case WireErrc::UnknownType: return "UnknownType";
        case WireErrc::Truncated: return "Truncated";
        case WireErrc::TrailingBytes: return "TrailingBytes";
        case WireErrc::BadUtf8: return "BadUtf8";
        case WireErrc::BadValue: return "BadValue";
        case WireErrc::Oversize: return "Oversize";
    }
    return "?";
}

bool valid_utf8(std::string_view s) {
    size_t i = 0;
    const size_t n = s.size();
    while (i < n) {
        uint8_t c = uint8_t(s[i]);
        if (c < 0x80) {
            ++i;
            continue;
        }
        size_t len;
        uint32_t cp;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > n) return false;
        for (size_t k = 1; k < len; ++k) {
            uint8_t cc = uint8_t(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // overlongs, surrogates, out of range
        if (len == 2 && cp < 0x80) return false;
        if (len == 3 && cp < 0x800) return false;
        if (len == 4 && cp < 0x10000) return false;
        if (cp > 0x10FFFF) return false;
        if (cp >= 0xD800 && cp <= 0xDFFF) return false;
        i += len;
    }
    return true;
}

std::vector<uint8_t> encode(const Message& m, uint32_t request_id) {
    Writer pw;
    write_payload(pw, m);
    std::vector<uint8_t> payload = pw.take();
    if (payload.size() > kMaxPayload)
        throw WireError(WireErrc::Oversize, "payload exceeds frame limit");

    Writer w;
    for (uint8_t b : kMagic) w.u8(b);
    w.u8(uint8_t(msg_type_of(m)));
    w.u32(request_id);
    w.u32(uint32_t(payload.size()));
    std::vector<uint8_t> frame = w.take();
    frame.insert(frame.end(), payload.begin(), payload.end());
    return frame;
}

Decoded decode(std::span<const uint8_t> bytes) {
    // Magic first: a wrong prefix is BadMagic even on a short buffer.
    for (size_t i = 0; i < kMagic.size() && i < bytes.size(); ++i)
        if (bytes[i] != kMagic[i])
            throw WireError(WireErrc::BadMagic, "bad frame magic");
    if (bytes.size() < kHeaderSize)
        throw WireError(WireErrc::Truncated, "incomplete header");

    uint8_t type = bytes[4];
    if (!known_msg_type(type))
        throw WireError(WireErrc::UnknownType, "unknown message type");
    uint32_t request_id = 0, payload_len = 0;
    for (int i = 0; i < 4; ++i) request_id |= uint32_t(bytes[5 + i]) << (8 * i);
    for (int i = 0; i < 4; ++i) payload_len |= uint32_t(bytes[9 + i]) << (8 * i);

    if (bytes.size() - kHeaderSize < payload_len)
        throw WireError(WireErrc::Truncated, "payload shorter than payload_len");
    if (bytes.size() - kHeaderSize > payload_len)
        throw WireError(WireErrc::TrailingBytes, "bytes past the frame end");

    Reader r(bytes.subspan(kHeaderSize, payload_len));
    Message m = read_payload(MsgType(type), r);
    if (r.remaining() != 0)
        throw WireError(WireErrc::TrailingBytes, "payload longer than message");
    return Decoded{std::move(m), request_id};
}

void FrameReader::feed(std::span<const uint8_t> chunk) {
    if (poisoned_) return;
    // Compact the consumed prefix before growing.
    if (pos_ > 0 && pos_ == buf_.size()) {
        buf_.clear();
        pos_ = 0;
    } else if (pos_ > 4096) {
        buf_.erase(buf_.begin(), buf_.begin() + long(pos_));
        pos_ = 0;
    }
    buf_.insert(buf_.end(), chunk.begin(), chunk.end());
}

std::optional<Decoded> FrameReader::next() {
    if (poisoned_) throw WireError(error_->first, error_->second);
    size_t avail = buf_.size() - pos_;
    auto fail = [&](WireErrc c, const char* what) -> std::optional<Decoded> {
        poisoned_ = true;
        error_ = {c, what};
        throw WireError(c, what);
    };
    for (size_t i = 0; i < kMagic.size() && i < avail; ++i)
        if (buf_[pos_ + i] != kMagic[i]) return fail(WireErrc::BadMagic, "bad frame magic");
    if (avail < kHeaderSize) return std::nullopt;
    if (!known_msg_type(buf_[pos_ + 4]))
        return fail(WireErrc::UnknownType, "unknown message type");
    uint32_t payload_len = 0;
    for (int i = 0; i < 4; ++i) payload_len |= uint32_t(buf_[pos_ + 9 + i]) << (8 * i);
    if (payload_len > kMaxPayload)
        return fail(WireErrc::Oversize, "payload exceeds frame limit");
    if (avail < kHeaderSize + payload_len) return std::nullopt;

    std::span<const uint8_t> frame(buf_.data() + pos_, kHeaderSize + payload_len);
    try {
        Decoded d = decode(frame);
        pos_ += frame.size();
        return d;
    } catch (const WireError& e) {
        poisoned_ = true;
        error_ = {e.code(), e.what()};
        throw;
    }
}

}  // namespace uarl::wire
