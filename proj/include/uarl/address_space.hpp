#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace uarl {

// ---------------------------------------------------------------------------
// Node identity
// ---------------------------------------------------------------------------

/// Identifies a node within one address space: a namespace index plus either
/// a numeric or a text identifier. Ordering is (namespace, numeric-before-text,
/// identifier), which fixes the deterministic iteration order of a space.
struct NodeId {
    uint16_t ns = 0;
    std::variant<uint32_t, std::string> ident = uint32_t{0};

    static NodeId numeric(uint16_t ns, uint32_t id) { return NodeId{ns, id}; }
    static NodeId text(uint16_t ns, std::string id);

    bool is_numeric() const { return ident.index() == 0; }
    uint32_t numeric_id() const { return std::get<uint32_t>(ident); }
    const std::string& text_id() const { return std::get<std::string>(ident); }

    std::string to_string() const;

    // variant compares by alternative index first, so numeric (index 0)
    // sorts before text (index 1) as required.
    auto operator<=>(const NodeId&) const = default;
};

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

enum class ValueType : uint8_t { Bool = 0, Int32 = 1, Double = 2, Text = 3 };

/// A typed variable value. Double payloads are always finite; NaN and
/// infinities are rejected at construction.
class Value {
  public:
    Value() : data_(int32_t{0}) {}

    static Value boolean(bool b) { return Value(b); }
    static Value int32(int32_t i) { return Value(i); }
    static Value real(double d);
    static Value text(std::string s) { return Value(std::move(s)); }

    ValueType type() const { return static_cast<ValueType>(data_.index()); }
    bool as_bool() const { return std::get<bool>(data_); }
    int32_t as_int32() const { return std::get<int32_t>(data_); }
    double as_double() const { return std::get<double>(data_); }
    const std::string& as_text() const { return std::get<std::string>(data_); }

    /// Numeric view regardless of Int32/Double representation; throws for
    /// Bool/Text.
    double as_number() const;

    std::string to_string() const;

    bool operator==(const Value&) const = default;

  private:
    explicit Value(bool b) : data_(b) {}
    explicit Value(int32_t i) : data_(i) {}
    explicit Value(double d) : data_(d) {}
    explicit Value(std::string s) : data_(std::move(s)) {}

    std::variant<bool, int32_t, double, std::string> data_;
};

// ---------------------------------------------------------------------------
// RL markers
// ---------------------------------------------------------------------------

enum class MarkerKind : uint8_t {
    IntObservation = 0,
    DoubleObservation = 1,
    IntAction = 2,
    DoubleAction = 3,
};

const char* marker_kind_name(MarkerKind k);

/// Declares a variable part of the action or observation space, with a
/// min/max/step grid of admissible values. Int kinds require integral
/// min/max/step with (max - min) an exact multiple of step.
struct RLMarker {
    MarkerKind kind = MarkerKind::IntObservation;
    double min = 0;
    double max = 0;
    double step = 1;

    static RLMarker int_action(int32_t min, int32_t max, int32_t step);
    static RLMarker int_observation(int32_t min, int32_t max, int32_t step);
    static RLMarker double_action(double min, double max, double step);
    static RLMarker double_observation(double min, double max, double step);

    bool is_action() const {
        return kind == MarkerKind::IntAction || kind == MarkerKind::DoubleAction;
    }
    bool is_observation() const { return !is_action(); }
    bool is_int() const {
        return kind == MarkerKind::IntAction || kind == MarkerKind::IntObservation;
    }

    /// min <= max, step > 0, and for Int kinds integral fields with
    /// (max - min) divisible by step.
    bool valid() const;

    /// Number of grid points (0 if invalid).
    size_t value_count() const;

    /// Membership in the enumerated grid. Doubles use absolute tolerance 1e-9.
    bool contains(const Value& v) const;

    bool operator==(const RLMarker&) const = default;
};

/// The marker's value grid [min, min+step, ...], ascending, last term
/// <= max (+1e-9 for Double kinds). Precondition: marker.valid().
std::vector<Value> enumerate_values(const RLMarker& marker);

// ---------------------------------------------------------------------------
// Nodes
// ---------------------------------------------------------------------------

enum class NodeClass : uint8_t {
    Object = 0,
    Variable = 1,
    Method = 2,
    ObjectType = 3,
    Property = 4,
};

const char* node_class_name(NodeClass c);

enum class ReferenceType : uint8_t {
    Organizes = 0,
    HasComponent = 1,
    HasProperty = 2,
    HasTypeDefinition = 3,
};

const char* reference_type_name(ReferenceType r);

struct Reference {
    ReferenceType type;
    NodeId target;
    bool operator==(const Reference&) const = default;
};

struct Node {
    NodeId id;
    std::string browse_name;
    NodeClass node_class = NodeClass::Object;
    std::optional<NodeId> type_definition;
    std::optional<Value> value;   // Variables only
    std::vector<Reference> references;
    std::optional<RLMarker> marker;  // Variables only
};

/// One browse result row: the reference plus a descriptor of its target.
struct BrowseEntry {
    ReferenceType ref_type;
    NodeId target;
    std::string browse_name;
    NodeClass node_class = NodeClass::Object;
    std::optional<NodeId> type_definition;
    std::optional<RLMarker> marker;

    bool operator==(const BrowseEntry&) const = default;
};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class SpaceErrc {
    DuplicateNodeId,
    DanglingReference,
    InvalidNode,
    NotAVariable,
    AlreadyMarked,
    InvalidMarker,
    ValueOutOfRange,
    NoSuchNode,
    TypeMismatch,
};

const char* space_errc_name(SpaceErrc c);

class SpaceError : public std::runtime_error {
  public:
    SpaceError(SpaceErrc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    SpaceErrc code() const { return code_; }

  private:
    SpaceErrc code_;
};

// ---------------------------------------------------------------------------
// Address space
// ---------------------------------------------------------------------------

/// Well-known node ids every address space is seeded with.
namespace wellknown {
inline const NodeId objects = NodeId::numeric(0, 85);
inline const NodeId base_data_variable_type = NodeId::numeric(0, 63);
inline const NodeId property_type = NodeId::numeric(0, 68);
inline const NodeId int_observation_type = NodeId::numeric(0, 1001);
inline const NodeId double_observation_type = NodeId::numeric(0, 1002);
inline const NodeId int_action_type = NodeId::numeric(0, 1003);
inline const NodeId double_action_type = NodeId::numeric(0, 1004);

NodeId marker_type_id(MarkerKind k);
std::optional<MarkerKind> marker_kind_of_type(const NodeId& id);
}  // namespace wellknown

/// In-memory information model: typed nodes, references, values and RL
/// markers. Single-owner; all mutation and listener dispatch is synchronous
/// and serialized by the owner (the server).
class AddressSpace {
  public:
    using ChangeListener = std::function<void(const NodeId&, const Value&)>;
    using NodeMap = std::map<NodeId, Node>;

    /// Seeds the Objects folder, the base type nodes and the four marker
    /// ObjectTypes.
    AddressSpace();

    const NodeId& root() const { return wellknown::objects; }

    /// Inserts a node. All references must resolve (self-references are
    /// allowed); a HasTypeDefinition reference is materialized automatically
    /// when type_definition is set.
    void add_node(Node node);

    /// Adds a reference between two existing nodes.
    void add_reference(const NodeId& source, ReferenceType type, const NodeId& target);

    /// Extends a variable with a marker: stores it on the node and builds the
    /// property subtree (kind-typed property with min/max/step variables)
    /// reachable via HasProperty, so both views agree.
    void attach_marker(const NodeId& target, const RLMarker& marker);

    /// Replaces a variable's value. Fires every change listener exactly once
    /// when (and only when) the stored value actually changed.
    void set_value(const NodeId& id, const Value& v);

    std::vector<BrowseEntry> browse(const NodeId& id) const;

    const Node* find(const NodeId& id) const;
    const Node& at(const NodeId& id) const;  // throws NoSuchNode
    std::optional<RLMarker> marker_of(const NodeId& id) const;

    /// Reconstructs a marker from its materialized property subtree; used to
    /// check that the denormalized field and the browsable view agree.
    std::optional<RLMarker> marker_from_subtree(const NodeId& target) const;

    void add_change_listener(ChangeListener fn);

    size_t node_count() const { return nodes_.size(); }
    NodeMap::const_iterator begin() const { return nodes_.begin(); }
    NodeMap::const_iterator end() const { return nodes_.end(); }

  private:
    void add_raw(Node node);  // no reference validation (seeding/subtrees)

    NodeMap nodes_;
    std::vector<ChangeListener> listeners_;
};

}  // namespace uarl
