#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <thread>

#include "uarl/address_space.hpp"
#include "uarl/server.hpp"

namespace uarl {

enum class MaterialColor { Green, Blue };
enum class PlantOutcome { Correct, Wrong, Dropped, Stuck };
enum class PlantPhase { Inbound, AtColorStation, OnTable, Terminal };

const char* plant_outcome_name(PlantOutcome o);

/// Node ids of the sorting plant's address space (namespace 1).
struct PlantNodes {
    NodeId turntable = NodeId::numeric(1, 10);
    NodeId rotate_table = NodeId::numeric(1, 11);     // IntAction(0,1,1)
    NodeId belt_direction = NodeId::numeric(1, 12);   // IntAction(0,1,1), 0=left 1=right
    NodeId light_barrier = NodeId::numeric(1, 13);    // IntObservation(0,1,1)
    NodeId color_inspection = NodeId::numeric(1, 14); // IntObservation(0,2,1), 0=none 1=green 2=blue
    NodeId left_station_color = NodeId::numeric(1, 15);
    NodeId right_station_color = NodeId::numeric(1, 16);
    NodeId light_grid = NodeId::numeric(1, 17);
    NodeId stuck_detected = NodeId::numeric(1, 18);
    NodeId reset_method = NodeId::numeric(1, 19);
};

/// The Turntable object with its actuators, sensors, reward sensors and the
/// Reset method; the two actuators and two sensors carry the markers that
/// put them in the action/observation space.
AddressSpace build_plant_address_space();

struct PlantOptions {
    uint64_t seed = 1;
    int stuck_timeout = 10;     // simulated time units
    bool green_to_left = true;  // which station counts as correct per color
};

/// Deterministic event machine of the material-flow sorting plant: a material
/// is released at the outlet, inspected at the color station, and routed by
/// the turntable either to a side station (rotated) or off the far edge
/// (unrotated). Rotating under the feed junction jams the material; a
/// watchdog on simulated time surfaces that as StuckDetected.
///
/// The machine is single-owner; callers serialize reset/actuate/tick/on_write
/// through the owning server's execution domain.
class PlantSim {
  public:
    explicit PlantSim(PlantOptions options = {});

    /// Starts a fresh episode: phase Inbound, all sensors back to their idle
    /// values (changes emit), a new material color drawn. Actuators are left
    /// untouched.
    void reset(AddressSpace& space);

    /// Applies the actuator pair once and advances the event machine.
    /// Ignored (with a warning) in a terminal phase.
    void actuate(AddressSpace& space, int rotate, int direction);

    /// Advances the stuck watchdog by n simulated time units.
    void tick(AddressSpace& space, int n = 1);

    /// Server write hook: a write to the belt-direction actuator commits the
    /// current actuator pair (the final write of each control cycle).
    void on_write(AddressSpace& space, const NodeId& node, const Value& value);

    /// Reset method handler; faults on a non-empty argument list.
    std::pair<uint8_t, std::vector<Value>> handle_reset(AddressSpace& space,
                                                        const std::vector<Value>& args);

    PlantPhase phase() const { return phase_; }
    std::optional<PlantOutcome> outcome() const { return outcome_; }
    std::optional<MaterialColor> material() const { return color_; }
    bool jam_pending() const { return jam_pending_; }
    const PlantNodes& nodes() const { return nodes_; }

  private:
    void enter_terminal(PlantOutcome outcome);

    PlantNodes nodes_;
    PlantOptions options_;
    std::mt19937_64 rng_;
    PlantPhase phase_ = PlantPhase::Terminal;
    std::optional<MaterialColor> color_;
    std::optional<PlantOutcome> outcome_;
    bool jam_pending_ = false;
    int jam_elapsed_ = 0;
};

struct PlantServerOptions {
    Endpoint endpoint{"127.0.0.1", 4850};
    PlantOptions plant;
    bool realtime = false;  // pace the watchdog in wall-clock seconds
    std::chrono::microseconds accelerated_tick{100};
    std::string server_name = "uarl-plant";
};

/// The simulated plant behind a live node server: hosts the address space,
/// wires actuator writes and the Reset method into the event machine, and
/// paces the stuck watchdog from a background tick thread.
class PlantServer {
  public:
    explicit PlantServer(PlantServerOptions options = {});
    ~PlantServer();

    void start();  // throws BindError
    void stop();

    Endpoint endpoint() const { return server_.endpoint(); }
    uint16_t port() const { return server_.port(); }
    Server& server() { return server_; }
    const PlantNodes& nodes() const { return node_ids_; }

  private:
    PlantServerOptions options_;
    PlantNodes node_ids_;
    PlantSim plant_;
    Server server_;
    std::atomic<bool> ticking_{false};
    std::thread ticker_;
};

}  // namespace uarl
