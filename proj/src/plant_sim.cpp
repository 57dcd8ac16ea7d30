#include "uarl/plant_sim.hpp"

#include "uarl/log.hpp"

namespace uarl {

const char* plant_outcome_name(PlantOutcome o) {
    switch (o) {
        case PlantOutcome::Correct: return "correct";
        case PlantOutcome::Wrong: return "wrong";
        case PlantOutcome::Dropped: return "dropped";
        case PlantOutcome::Stuck: return "stuck";
    }
    return "?";
}

AddressSpace build_plant_address_space() {
    PlantNodes n;
    AddressSpace space;

    auto int_var = [](const NodeId& id, const char* name) {
        return Node{id, name, NodeClass::Variable, wellknown::base_data_variable_type,
                    Value::int32(0), {}, {}};
    };

    space.add_node(int_var(n.rotate_table, "RotateTable"));
    space.add_node(int_var(n.belt_direction, "BeltDirection"));
    space.add_node(int_var(n.light_barrier, "LightBarrier"));
    space.add_node(int_var(n.color_inspection, "ColorInspection"));
    space.add_node(int_var(n.left_station_color, "LeftStationColor"));
    space.add_node(int_var(n.right_station_color, "RightStationColor"));
    space.add_node(int_var(n.light_grid, "LightGrid"));
    space.add_node(int_var(n.stuck_detected, "StuckDetected"));
    space.add_node(Node{n.reset_method, "Reset", NodeClass::Method, {}, {}, {}, {}});

    space.add_node(Node{n.turntable, "Turntable", NodeClass::Object, {}, {},
                        {{ReferenceType::HasComponent, n.rotate_table},
                         {ReferenceType::HasComponent, n.belt_direction},
                         {ReferenceType::HasComponent, n.light_barrier},
                         {ReferenceType::HasComponent, n.color_inspection},
                         {ReferenceType::HasComponent, n.left_station_color},
                         {ReferenceType::HasComponent, n.right_station_color},
                         {ReferenceType::HasComponent, n.light_grid},
                         {ReferenceType::HasComponent, n.stuck_detected},
                         {ReferenceType::HasComponent, n.reset_method}},
                        {}});

    space.add_reference(wellknown::objects, ReferenceType::Organizes, n.turntable);

    space.attach_marker(n.rotate_table, RLMarker::int_action(0, 1, 1));
    space.attach_marker(n.belt_direction, RLMarker::int_action(0, 1, 1));
    space.attach_marker(n.light_barrier, RLMarker::int_observation(0, 1, 1));
    space.attach_marker(n.color_inspection, RLMarker::int_observation(0, 2, 1));

    return space;
}

PlantSim::PlantSim(PlantOptions options) : options_(options), rng_(options.seed) {}

void PlantSim::enter_terminal(PlantOutcome outcome) {
    phase_ = PlantPhase::Terminal;
    outcome_ = outcome;
    jam_pending_ = false;
    jam_elapsed_ = 0;
}

void PlantSim::reset(AddressSpace& space) {
    phase_ = PlantPhase::Inbound;
    outcome_.reset();
    jam_pending_ = false;
    jam_elapsed_ = 0;
    color_ = (rng_() & 1) ? MaterialColor::Blue : MaterialColor::Green;

    const Value zero = Value::int32(0);
    space.set_value(nodes_.light_barrier, zero);
    space.set_value(nodes_.color_inspection, zero);
    space.set_value(nodes_.left_station_color, zero);
    space.set_value(nodes_.right_station_color, zero);
    space.set_value(nodes_.light_grid, zero);
    space.set_value(nodes_.stuck_detected, zero);
}

void PlantSim::actuate(AddressSpace& space, int rotate, int direction) {
    if (phase_ == PlantPhase::Terminal) {
        log::warn("plant: actuation ignored in terminal phase (rotate=%d direction=%d)",
                  rotate, direction);
        return;
    }

    switch (phase_) {
        case PlantPhase::Inbound:
            if (rotate == 1) {
                // the rotated table blocks the feed junction; the watchdog
                // will flag the jam once stuck_timeout elapses
                jam_pending_ = true;
                jam_elapsed_ = 0;
            } else {
                int code = (color_ == MaterialColor::Green) ? 1 : 2;
                space.set_value(nodes_.color_inspection, Value::int32(code));
                phase_ = PlantPhase::AtColorStation;
            }
            break;

        case PlantPhase::AtColorStation:
            if (rotate == 1) {
                bool green = (color_ == MaterialColor::Green);
                bool went_left = (direction == 0);
                int code = green ? 1 : 2;
                space.set_value(nodes_.color_inspection, Value::int32(0));
                space.set_value(went_left ? nodes_.left_station_color
                                          : nodes_.right_station_color,
                                Value::int32(code));
                bool correct = green ? (went_left == options_.green_to_left)
                                     : (went_left != options_.green_to_left);
                enter_terminal(correct ? PlantOutcome::Correct : PlantOutcome::Wrong);
            } else {
                // material slides onto the unrotated table
                space.set_value(nodes_.color_inspection, Value::int32(0));
                space.set_value(nodes_.light_barrier, Value::int32(1));
                phase_ = PlantPhase::OnTable;
            }
            break;

        case PlantPhase::OnTable:
            // tipped or carried off the far edge, whatever the actuators do
            space.set_value(nodes_.light_barrier, Value::int32(0));
            space.set_value(nodes_.light_grid, Value::int32(1));
            enter_terminal(PlantOutcome::Dropped);
            break;

        case PlantPhase::Terminal:
            break;
    }
}

void PlantSim::tick(AddressSpace& space, int n) {
    if (!jam_pending_ || phase_ == PlantPhase::Terminal) return;
    jam_elapsed_ += n;
    if (jam_elapsed_ >= options_.stuck_timeout) {
        space.set_value(nodes_.stuck_detected, Value::int32(1));
        enter_terminal(PlantOutcome::Stuck);
    }
}

void PlantSim::on_write(AddressSpace& space, const NodeId& node, const Value&) {
    if (node != nodes_.belt_direction) return;
    int rotate = space.at(nodes_.rotate_table).value->as_int32();
    int direction = space.at(nodes_.belt_direction).value->as_int32();
    actuate(space, rotate, direction);
}

std::pair<uint8_t, std::vector<Value>> PlantSim::handle_reset(
    AddressSpace& space, const std::vector<Value>& args) {
    if (!args.empty()) throw MethodFault("Reset takes no arguments");
    reset(space);
    return {0, {}};
}

PlantServer::PlantServer(PlantServerOptions options)
    : options_(std::move(options)),
      plant_(options_.plant),
      server_(options_.endpoint, build_plant_address_space(),
              ServerOptions{options_.server_name}) {
    server_.set_write_hook([this](AddressSpace& space, const NodeId& node, const Value& v) {
        plant_.on_write(space, node, v);
    });
    server_.add_method(node_ids_.reset_method,
                       [this](AddressSpace& space, const std::vector<Value>& args) {
                           return plant_.handle_reset(space, args);
                       });
}

PlantServer::~PlantServer() { stop(); }

void PlantServer::start() {
    server_.start();
    ticking_ = true;
    auto interval = options_.realtime ? std::chrono::microseconds(1'000'000)
                                      : options_.accelerated_tick;
    ticker_ = std::thread([this, interval] {
        while (ticking_) {
            std::this_thread::sleep_for(interval);
            if (!ticking_) break;
            server_.execute([this](AddressSpace& space) { plant_.tick(space, 1); });
        }
    });
}

void PlantServer::stop() {
    if (ticking_.exchange(false)) {
        if (ticker_.joinable()) ticker_.join();
    }
    server_.stop();
}

}  // namespace uarl
