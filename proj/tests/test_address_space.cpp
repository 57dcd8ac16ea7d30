#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "uarl/address_space.hpp"

using namespace uarl;

namespace {

NodeId nid(uint32_t id) { return NodeId::numeric(1, id); }

Node variable(uint32_t id, std::string name, Value v,
              std::vector<Reference> refs = {}) {
    return Node{nid(id), std::move(name), NodeClass::Variable,
                wellknown::base_data_variable_type, std::move(v), std::move(refs), {}};
}

Node object(uint32_t id, std::string name, std::vector<Reference> refs = {}) {
    return Node{nid(id), std::move(name), NodeClass::Object, {}, {}, std::move(refs), {}};
}

}  // namespace

TEST_CASE("empty space is seeded with the well-known nodes") {
    AddressSpace space;
    CHECK(space.find(wellknown::objects) != nullptr);
    CHECK(space.at(wellknown::objects).node_class == NodeClass::Object);
    CHECK(space.find(wellknown::int_action_type) != nullptr);
    CHECK(space.at(wellknown::int_action_type).browse_name == "IntAction");
    CHECK(space.root() == wellknown::objects);
}

TEST_CASE("add_node stores nodes and rejects duplicates") {
    AddressSpace space;
    size_t base = space.node_count();
    space.add_node(object(10, "Turntable"));
    CHECK(space.node_count() == base + 1);

    CHECK_THROWS_AS(space.add_node(object(10, "Again")), SpaceError);
    try {
        space.add_node(object(10, "Again"));
    } catch (const SpaceError& e) {
        CHECK(e.code() == SpaceErrc::DuplicateNodeId);
    }
}

TEST_CASE("add_node validates references") {
    AddressSpace space;
    SUBCASE("dangling reference rejected") {
        try {
            space.add_node(object(10, "T", {{ReferenceType::Organizes, nid(99)}}));
            FAIL("expected DanglingReference");
        } catch (const SpaceError& e) {
            CHECK(e.code() == SpaceErrc::DanglingReference);
        }
    }
    SUBCASE("self-reference allowed") {
        space.add_node(object(10, "T", {{ReferenceType::Organizes, nid(10)}}));
        CHECK(space.find(nid(10)) != nullptr);
    }
    SUBCASE("value on a non-Variable rejected") {
        Node bad = object(10, "T");
        bad.value = Value::int32(1);
        CHECK_THROWS_AS(space.add_node(bad), SpaceError);
    }
}

TEST_CASE("LightBarrier under Turntable is browsable") {
    AddressSpace s;
    s.add_node(variable(13, "LightBarrier", Value::int32(0)));
    s.add_node(object(10, "Turntable", {{ReferenceType::HasComponent, nid(13)}}));

    auto entries = s.browse(nid(10));
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].ref_type == ReferenceType::HasComponent);
    CHECK(entries[0].browse_name == "LightBarrier");
    CHECK(entries[0].node_class == NodeClass::Variable);
}

TEST_CASE("browse reports references in stored order with type entries") {
    AddressSpace s;
    s.add_node(variable(11, "A", Value::int32(0)));
    auto entries = s.browse(nid(11));
    // auto-materialized HasTypeDefinition only
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].ref_type == ReferenceType::HasTypeDefinition);
    CHECK(entries[0].target == wellknown::base_data_variable_type);

    CHECK_THROWS_AS(s.browse(nid(999)), SpaceError);
}

TEST_CASE("attach_marker materializes the property subtree") {
    AddressSpace s;
    s.add_node(variable(11, "RotateTable", Value::int32(0)));
    s.attach_marker(nid(11), RLMarker::int_action(0, 1, 1));

    auto m = s.marker_of(nid(11));
    REQUIRE(m.has_value());
    CHECK(m->kind == MarkerKind::IntAction);
    CHECK(m->min == 0);
    CHECK(m->max == 1);
    CHECK(m->step == 1);

    // the denormalized field and the browsable subtree agree
    auto sub = s.marker_from_subtree(nid(11));
    REQUIRE(sub.has_value());
    CHECK(*sub == *m);

    // the subtree is reachable via HasProperty and typed by the kind
    auto entries = s.browse(nid(11));
    bool found = false;
    for (const auto& e : entries) {
        if (e.ref_type != ReferenceType::HasProperty) continue;
        found = true;
        CHECK(e.node_class == NodeClass::Property);
        CHECK(e.type_definition == wellknown::int_action_type);
        CHECK(e.browse_name == "IntAction");
    }
    CHECK(found);
}

TEST_CASE("attach_marker error paths") {
    AddressSpace s;
    s.add_node(object(10, "Turntable"));
    s.add_node(variable(11, "V", Value::int32(0)));
    s.add_node(variable(12, "D", Value::real(0.5)));

    auto code_of = [&](auto fn) {
        try {
            fn();
        } catch (const SpaceError& e) {
            return e.code();
        }
        return SpaceErrc::NoSuchNode;
    };

    CHECK(code_of([&] { s.attach_marker(nid(10), RLMarker::int_action(0, 1, 1)); }) ==
          SpaceErrc::NotAVariable);
    CHECK(code_of([&] { s.attach_marker(nid(11), RLMarker{MarkerKind::IntAction, 0, 1, 0}); }) ==
          SpaceErrc::InvalidMarker);
    CHECK(code_of([&] { s.attach_marker(nid(11), RLMarker{MarkerKind::IntAction, 2, 1, 1}); }) ==
          SpaceErrc::InvalidMarker);
    CHECK(code_of([&] { s.attach_marker(nid(11), RLMarker::int_action(1, 2, 1)); }) ==
          SpaceErrc::ValueOutOfRange);
    // kind/datatype mismatch
    CHECK(code_of([&] { s.attach_marker(nid(12), RLMarker::int_action(0, 1, 1)); }) ==
          SpaceErrc::InvalidMarker);

    s.attach_marker(nid(11), RLMarker::int_action(0, 1, 1));
    CHECK(code_of([&] { s.attach_marker(nid(11), RLMarker::int_observation(0, 1, 1)); }) ==
          SpaceErrc::AlreadyMarked);
}

TEST_CASE("set_value fires listeners only on actual change, in order") {
    AddressSpace s;
    s.add_node(variable(13, "LightBarrier", Value::int32(0)));

    std::vector<std::pair<NodeId, Value>> seen;
    s.add_change_listener([&](const NodeId& id, const Value& v) { seen.emplace_back(id, v); });

    s.set_value(nid(13), Value::int32(1));
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].first == nid(13));
    CHECK(seen[0].second == Value::int32(1));

    s.set_value(nid(13), Value::int32(1));  // unchanged: no event
    CHECK(seen.size() == 1);

    // k distinct writes fire exactly k invocations in write order
    for (int i = 0; i < 5; ++i) s.set_value(nid(13), Value::int32(i % 2));
    CHECK(seen.size() == 6);
    CHECK(seen.back().second == Value::int32(0));
}

TEST_CASE("set_value error paths") {
    AddressSpace s;
    s.add_node(variable(11, "RotateTable", Value::int32(0)));
    s.attach_marker(nid(11), RLMarker::int_action(0, 1, 1));

    auto code_of = [&](auto fn) {
        try {
            fn();
        } catch (const SpaceError& e) {
            return e.code();
        }
        return SpaceErrc::DuplicateNodeId;
    };
    CHECK(code_of([&] { s.set_value(nid(99), Value::int32(0)); }) == SpaceErrc::NoSuchNode);
    CHECK(code_of([&] { s.set_value(nid(11), Value::real(1.0)); }) == SpaceErrc::TypeMismatch);
    CHECK(code_of([&] { s.set_value(nid(11), Value::int32(2)); }) == SpaceErrc::ValueOutOfRange);
}

TEST_CASE("marked node values stay inside the marker grid") {
    AddressSpace s;
    s.add_node(variable(14, "ColorInspection", Value::int32(0)));
    s.attach_marker(nid(14), RLMarker::int_observation(0, 2, 1));

    auto values = enumerate_values(*s.marker_of(nid(14)));
    for (const auto& v : values) s.set_value(nid(14), v);
    CHECK(s.at(nid(14)).value == Value::int32(2));
    CHECK_THROWS_AS(s.set_value(nid(14), Value::int32(3)), SpaceError);
}

TEST_CASE("enumerate_values") {
    SUBCASE("boolean actuator grid") {
        auto v = enumerate_values(RLMarker::int_action(0, 1, 1));
        REQUIRE(v.size() == 2);
        CHECK(v[0] == Value::int32(0));
        CHECK(v[1] == Value::int32(1));
    }
    SUBCASE("strided int grid") {
        auto v = enumerate_values(RLMarker::int_observation(0, 10, 2));
        REQUIRE(v.size() == 6);
        for (size_t i = 0; i < 6; ++i) CHECK(v[i] == Value::int32(int32_t(2 * i)));
    }
    SUBCASE("double grid") {
        auto v = enumerate_values(RLMarker::double_observation(0.0, 1.0, 0.25));
        REQUIRE(v.size() == 5);
        CHECK(v[0].as_double() == doctest::Approx(0.0));
        CHECK(v[4].as_double() == doctest::Approx(1.0));
    }
    SUBCASE("non-divisible double range truncates at the last term <= max") {
        auto v = enumerate_values(RLMarker::double_observation(0.0, 1.0, 0.3));
        REQUIRE(v.size() == 4);  // 0, 0.3, 0.6, 0.9
        CHECK(v.back().as_double() == doctest::Approx(0.9));
    }
    SUBCASE("tolerance keeps the endpoint despite float error") {
        auto v = enumerate_values(RLMarker::double_observation(0.0, 0.3, 0.1));
        REQUIRE(v.size() == 4);  // 3*0.1 = 0.30000000000000004 still counts
    }
    SUBCASE("length law for int kinds") {
        std::mt19937 g(7);
        for (int i = 0; i < 200; ++i) {
            int32_t min = int32_t(g() % 40) - 20;
            int32_t step = 1 + int32_t(g() % 5);
            int32_t max = min + step * int32_t(g() % 8);
            auto v = enumerate_values(RLMarker::int_observation(min, max, step));
            CHECK(v.size() == size_t((max - min) / step) + 1);
            CHECK(std::is_sorted(v.begin(), v.end(), [](const Value& a, const Value& b) {
                return a.as_int32() < b.as_int32();
            }));
        }
    }
}

TEST_CASE("Value rejects non-finite doubles") {
    CHECK_THROWS_AS(Value::real(std::numeric_limits<double>::quiet_NaN()), SpaceError);
    CHECK_THROWS_AS(Value::real(std::numeric_limits<double>::infinity()), SpaceError);
    CHECK(Value::real(0.0).as_double() == 0.0);
}

TEST_CASE("NodeId ordering: namespace, numeric before text, identifier") {
    std::vector<NodeId> ids = {
        NodeId::text(1, "b"), NodeId::numeric(1, 2), NodeId::numeric(0, 99),
        NodeId::text(1, "a"), NodeId::numeric(1, 1),
    };
    std::sort(ids.begin(), ids.end());
    CHECK(ids[0] == NodeId::numeric(0, 99));
    CHECK(ids[1] == NodeId::numeric(1, 1));
    CHECK(ids[2] == NodeId::numeric(1, 2));
    CHECK(ids[3] == NodeId::text(1, "a"));
    CHECK(ids[4] == NodeId::text(1, "b"));

    CHECK_THROWS_AS(NodeId::text(1, ""), SpaceError);
}

TEST_CASE("iteration order is deterministic across construction order") {
    AddressSpace a, b;
    a.add_node(variable(12, "B", Value::int32(0)));
    a.add_node(variable(11, "A", Value::int32(0)));
    b.add_node(variable(11, "A", Value::int32(0)));
    b.add_node(variable(12, "B", Value::int32(0)));

    std::vector<NodeId> ia, ib;
    for (const auto& [id, n] : a) ia.push_back(id);
    for (const auto& [id, n] : b) ib.push_back(id);
    CHECK(ia == ib);
}
