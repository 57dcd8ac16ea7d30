#include "uarl/address_space.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace uarl {

namespace {

constexpr double kDoubleTol = 1e-9;

std::string marker_base_ident(const NodeId& target) {
    if (target.is_numeric()) return std::to_string(target.numeric_id()) + ".rl";
    return target.text_id() + ".rl";
}

bool integral(double d) { return std::floor(d) == d; }

bool fits_int32(double d) {
    return d >= std::numeric_limits<int32_t>::min() &&
           d <= std::numeric_limits<int32_t>::max();
}

}  // namespace

NodeId NodeId::text(uint16_t ns, std::string id) {
    if (id.empty())
        throw SpaceError(SpaceErrc::InvalidNode, "text node identifier must be non-empty");
    return NodeId{ns, std::move(id)};
}

std::string NodeId::to_string() const {
    std::ostringstream os;
    os << "ns=" << ns << ";";
    if (is_numeric())
        os << "i=" << numeric_id();
    else
        os << "s=" << text_id();
    return os.str();
}

Value Value::real(double d) {
    if (!std::isfinite(d))
        throw SpaceError(SpaceErrc::InvalidNode, "Double values must be finite");
    return Value(d);
}

double Value::as_number() const {
    switch (type()) {
        case ValueType::Int32: return static_cast<double>(as_int32());
        case ValueType::Double: return as_double();
        default:
            throw SpaceError(SpaceErrc::TypeMismatch, "value is not numeric");
    }
}

std::string Value::to_string() const {
    std::ostringstream os;
    switch (type()) {
        case ValueType::Bool: os << (as_bool() ? "true" : "false"); break;
        case ValueType::Int32: os << as_int32(); break;
        case ValueType::Double: os << as_double(); break;
        case ValueType::Text: os << '"' << as_text() << '"'; break;
    }
    return os.str();
}

const char* marker_kind_name(MarkerKind k) {
    switch (k) {
        case MarkerKind::IntObservation: return "IntObservation";
        case MarkerKind::DoubleObservation: return "DoubleObservation";
        case MarkerKind::IntAction: return "IntAction";
        case MarkerKind::DoubleAction: return "DoubleAction";
    }
    return "?";
}

const char* node_class_name(NodeClass c) {
    switch (c) {
        case NodeClass::Object: return "Object";
        case NodeClass::Variable: return "Variable";
        case NodeClass::Method: return "Method";
        case NodeClass::ObjectType: return "ObjectType";
        case NodeClass::Property: return "Property";
    }
    return "?";
}

const char* reference_type_name(ReferenceType r) {
    switch (r) {
        case ReferenceType::Organizes: return "Organizes";
        case ReferenceType::HasComponent: return "HasComponent";
        case ReferenceType::HasProperty: return "HasProperty";
        case ReferenceType::HasTypeDefinition: return "HasTypeDefinition";
    }
    return "?";
}

const char* space_errc_name(SpaceErrc c) {
    switch (c) {
        case SpaceErrc::DuplicateNodeId: return "DuplicateNodeId";
        case SpaceErrc::DanglingReference: return "DanglingReference";
        case SpaceErrc::InvalidNode: return "InvalidNode";
        case SpaceErrc::NotAVariable: return "NotAVariable";
        case SpaceErrc::AlreadyMarked: return "AlreadyMarked";
        case SpaceErrc::InvalidMarker: return "InvalidMarker";
        case SpaceErrc::ValueOutOfRange: return "ValueOutOfRange";
        case SpaceErrc::NoSuchNode: return "NoSuchNode";
        case SpaceErrc::TypeMismatch: return "TypeMismatch";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// RLMarker
// ---------------------------------------------------------------------------

RLMarker RLMarker::int_action(int32_t min, int32_t max, int32_t step) {
    return RLMarker{MarkerKind::IntAction, double(min), double(max), double(step)};
}
RLMarker RLMarker::int_observation(int32_t min, int32_t max, int32_t step) {
    return RLMarker{MarkerKind::IntObservation, double(min), double(max), double(step)};
}
RLMarker RLMarker::double_action(double min, double max, double step) {
    return RLMarker{MarkerKind::DoubleAction, min, max, step};
}
RLMarker RLMarker::double_observation(double min, double max, double step) {
    return RLMarker{MarkerKind::DoubleObservation, min, max, step};
}

bool RLMarker::valid() const {
    if (!(std::isfinite(min) && std::isfinite(max) && std::isfinite(step))) return false;
    if (min > max || step <= 0) return false;
    if (is_int()) {
        if (!integral(min) || !integral(max) || !integral(step)) return false;
        if (!fits_int32(min) || !fits_int32(max)) return false;
        int64_t span = int64_t(max) - int64_t(min);
        if (span % int64_t(step) != 0) return false;
    }
    return true;
}

size_t RLMarker::value_count() const {
    if (!valid()) return 0;
    if (is_int()) return size_t((int64_t(max) - int64_t(min)) / int64_t(step)) + 1;
    size_t n = 0;
    while (min + double(n) * step <= max + kDoubleTol) ++n;
    return n;
}

bool RLMarker::contains(const Value& v) const {
    if (!valid()) return false;
    if (is_int()) {
        if (v.type() != ValueType::Int32) return false;
        int64_t x = v.as_int32();
        if (x < int64_t(min) || x > int64_t(max)) return false;
        return (x - int64_t(min)) % int64_t(step) == 0;
    }
    if (v.type() != ValueType::Double) return false;
    double x = v.as_double();
    if (x < min - kDoubleTol || x > max + kDoubleTol) return false;
    double k = std::round((x - min) / step);
    if (k < 0) return false;
    return std::abs(x - (min + k * step)) <= kDoubleTol;
}

std::vector<Value> enumerate_values(const RLMarker& marker) {
    if (!marker.valid())
        throw SpaceError(SpaceErrc::InvalidMarker, "marker invariants violated");
    std::vector<Value> out;
    if (marker.is_int()) {
        for (int64_t v = int64_t(marker.min); v <= int64_t(marker.max);
             v += int64_t(marker.step))
            out.push_back(Value::int32(int32_t(v)));
    } else {
        // min + k*step keeps the grid exact; repeated += would drift.
        for (size_t k = 0;; ++k) {
            double v = marker.min + double(k) * marker.step;
            if (v > marker.max + kDoubleTol) break;
            out.push_back(Value::real(v));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// wellknown
// ---------------------------------------------------------------------------

namespace wellknown {

NodeId marker_type_id(MarkerKind k) {
    switch (k) {
        case MarkerKind::IntObservation: return int_observation_type;
        case MarkerKind::DoubleObservation: return double_observation_type;
        case MarkerKind::IntAction: return int_action_type;
        case MarkerKind::DoubleAction: return double_action_type;
    }
    return int_observation_type;
}

std::optional<MarkerKind> marker_kind_of_type(const NodeId& id) {
    if (id == int_observation_type) return MarkerKind::IntObservation;
    if (id == double_observation_type) return MarkerKind::DoubleObservation;
    if (id == int_action_type) return MarkerKind::IntAction;
    if (id == double_action_type) return MarkerKind::DoubleAction;
    return std::nullopt;
}

}  // namespace wellknown

// ---------------------------------------------------------------------------
// AddressSpace
// ---------------------------------------------------------------------------

AddressSpace::AddressSpace() {
    add_raw(Node{wellknown::objects, "Objects", NodeClass::Object, {}, {}, {}, {}});
    add_raw(Node{wellknown::base_data_variable_type, "BaseDataVariableType",
                 NodeClass::ObjectType, {}, {}, {}, {}});
    add_raw(Node{wellknown::property_type, "PropertyType", NodeClass::ObjectType,
                 {}, {}, {}, {}});
    for (auto kind : {MarkerKind::IntObservation, MarkerKind::DoubleObservation,
                      MarkerKind::IntAction, MarkerKind::DoubleAction}) {
        add_raw(Node{wellknown::marker_type_id(kind), marker_kind_name(kind),
                     NodeClass::ObjectType, {}, {}, {}, {}});
    }
}

void AddressSpace::add_raw(Node node) {
    auto [it, inserted] = nodes_.emplace(node.id, std::move(node));
    if (!inserted)
        throw SpaceError(SpaceErrc::DuplicateNodeId,
                         "node already exists: " + it->first.to_string());
}

void AddressSpace::add_node(Node node) {
    if (node.node_class != NodeClass::Variable && (node.value || node.marker))
        throw SpaceError(SpaceErrc::InvalidNode,
                         "only Variable nodes carry a value or marker: " +
                             node.id.to_string());
    if (!node.id.is_numeric() && node.id.text_id().empty())
        throw SpaceError(SpaceErrc::InvalidNode, "text node identifier must be non-empty");
    if (node.marker && !node.marker->valid())
        throw SpaceError(SpaceErrc::InvalidMarker, "marker invariants violated");
    if (node.type_definition) {
        bool present = false;
        for (const auto& r : node.references)
            if (r.type == ReferenceType::HasTypeDefinition && r.target == *node.type_definition)
                present = true;
        if (!present)
            node.references.push_back({ReferenceType::HasTypeDefinition, *node.type_definition});
    }
    for (const auto& r : node.references) {
        if (r.target == node.id) continue;  // self-reference is allowed
        if (!nodes_.contains(r.target))
            throw SpaceError(SpaceErrc::DanglingReference,
                             "reference target missing: " + r.target.to_string());
    }
    add_raw(std::move(node));
}

void AddressSpace::add_reference(const NodeId& source, ReferenceType type,
                                 const NodeId& target) {
    auto it = nodes_.find(source);
    if (it == nodes_.end())
        throw SpaceError(SpaceErrc::NoSuchNode, "no such node: " + source.to_string());
    if (!nodes_.contains(target))
        throw SpaceError(SpaceErrc::DanglingReference,
                         "reference target missing: " + target.to_string());
    it->second.references.push_back({type, target});
}

void AddressSpace::attach_marker(const NodeId& target, const RLMarker& marker) {
    auto it = nodes_.find(target);
    if (it == nodes_.end())
        throw SpaceError(SpaceErrc::NoSuchNode, "no such node: " + target.to_string());
    Node& node = it->second;
    if (node.node_class != NodeClass::Variable)
        throw SpaceError(SpaceErrc::NotAVariable,
                         "marker target must be a Variable: " + target.to_string());
    if (node.marker)
        throw SpaceError(SpaceErrc::AlreadyMarked,
                         "node already marked: " + target.to_string());
    if (!marker.valid())
        throw SpaceError(SpaceErrc::InvalidMarker, "marker invariants violated");
    ValueType want = marker.is_int() ? ValueType::Int32 : ValueType::Double;
    if (!node.value || node.value->type() != want)
        throw SpaceError(SpaceErrc::InvalidMarker,
                         std::string("marker kind requires a ") +
                             (marker.is_int() ? "Int32" : "Double") + " variable");
    if (!marker.contains(*node.value))
        throw SpaceError(SpaceErrc::ValueOutOfRange,
                         "current value outside marker grid: " + node.value->to_string());

    // Materialize the browsable view: a kind-typed property node with
    // min/max/step child variables.
    std::string base = marker_base_ident(target);
    NodeId prop_id = NodeId::text(target.ns, base);
    auto field_value = [&](double d) {
        return marker.is_int() ? Value::int32(int32_t(d)) : Value::real(d);
    };
    struct Field { const char* name; double v; };
    std::vector<Reference> prop_refs;
    std::vector<Node> children;
    for (Field f : {Field{"min", marker.min}, Field{"max", marker.max},
                    Field{"step", marker.step}}) {
        NodeId cid = NodeId::text(target.ns, base + "." + f.name);
        children.push_back(Node{cid, f.name, NodeClass::Variable,
                                wellknown::property_type, field_value(f.v),
                                {}, {}});
        prop_refs.push_back({ReferenceType::HasProperty, cid});
    }
    for (auto& c : children) add_node(std::move(c));
    add_node(Node{prop_id, marker_kind_name(marker.kind), NodeClass::Property,
                  wellknown::marker_type_id(marker.kind), {}, std::move(prop_refs), {}});

    Node& tgt = nodes_.at(target);
    tgt.references.push_back({ReferenceType::HasProperty, prop_id});
    tgt.marker = marker;
}

void AddressSpace::set_value(const NodeId& id, const Value& v) {
    auto it = nodes_.find(id);
    if (it == nodes_.end())
        throw SpaceError(SpaceErrc::NoSuchNode, "no such node: " + id.to_string());
    Node& node = it->second;
    if (node.node_class != NodeClass::Variable || !node.value)
        throw SpaceError(SpaceErrc::TypeMismatch,
                         "node is not a value-bearing Variable: " + id.to_string());
    if (node.value->type() != v.type())
        throw SpaceError(SpaceErrc::TypeMismatch,
                         "value type mismatch on " + id.to_string());
    if (node.marker && !node.marker->contains(v))
        throw SpaceError(SpaceErrc::ValueOutOfRange,
                         "value outside marker grid: " + v.to_string());
    if (*node.value == v) return;  // unchanged writes fire no listeners
    node.value = v;
    for (const auto& fn : listeners_) fn(id, v);
}

std::vector<BrowseEntry> AddressSpace::browse(const NodeId& id) const {
    const Node& node = at(id);
    std::vector<BrowseEntry> out;
    out.reserve(node.references.size());
    for (const auto& r : node.references) {
        const Node& tgt = at(r.target);
        out.push_back(BrowseEntry{r.type, tgt.id, tgt.browse_name, tgt.node_class,
                                  tgt.type_definition, tgt.marker});
    }
    return out;
}

const Node* AddressSpace::find(const NodeId& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

const Node& AddressSpace::at(const NodeId& id) const {
    const Node* n = find(id);
    if (!n) throw SpaceError(SpaceErrc::NoSuchNode, "no such node: " + id.to_string());
    return *n;
}

std::optional<RLMarker> AddressSpace::marker_of(const NodeId& id) const {
    return at(id).marker;
}

std::optional<RLMarker> AddressSpace::marker_from_subtree(const NodeId& target) const {
    const Node& node = at(target);
    for (const auto& r : node.references) {
        if (r.type != ReferenceType::HasProperty) continue;
        const Node& prop = at(r.target);
        if (!prop.type_definition) continue;
        auto kind = wellknown::marker_kind_of_type(*prop.type_definition);
        if (!kind) continue;
        RLMarker m;
        m.kind = *kind;
        bool have_min = false, have_max = false, have_step = false;
        for (const auto& pr : prop.references) {
            if (pr.type != ReferenceType::HasProperty) continue;
            const Node& child = at(pr.target);
            if (!child.value) continue;
            double v = child.value->as_number();
            if (child.browse_name == "min") { m.min = v; have_min = true; }
            if (child.browse_name == "max") { m.max = v; have_max = true; }
            if (child.browse_name == "step") { m.step = v; have_step = true; }
        }
        if (have_min && have_max && have_step) return m;
    }
    return std::nullopt;
}

void AddressSpace::add_change_listener(ChangeListener fn) {
    listeners_.push_back(std::move(fn));
}

}  // namespace uarl
