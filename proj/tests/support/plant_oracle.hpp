#pragma once

// Test oracle: the sorting plant as an explicit MDP, written down directly
// from the intended dynamics. Kept independent of plant_sim so value
// iteration certifies the implementation rather than echoing it.
//
// States (mixed-radix over [LightBarrier(2), ColorInspection(3)], barrier
// most significant):
//   s0 = (0,0) material inbound
//   s1 = (0,1) green at the color station
//   s2 = (0,2) blue at the color station
//   s3 = (1,0) material on the table
//   s4, s5    = invalid (barrier high with a color reading); absorbing
// Actions (mixed-radix over [RotateTable(2), BeltDirection(2)]):
//   a0 = (0,0)  a1 = (0,1)  a2 = (1,0) rotate&left  a3 = (1,1) rotate&right

#include "uarl/agents.hpp"

namespace testoracle {

inline uarl::ExplicitMdp plant_mdp() {
    using uarl::MdpOutcome;
    uarl::ExplicitMdp mdp(6, 4);

    // inbound, table flat: the material advances; color revealed 50/50
    for (size_t a : {0, 1}) {
        mdp.add(0, a, MdpOutcome{0.5, 1, 0.0, false});
        mdp.add(0, a, MdpOutcome{0.5, 2, 0.0, false});
    }
    // inbound, table rotated: jam -> stuck
    for (size_t a : {2, 3}) mdp.add(0, a, MdpOutcome{1.0, 0, -5.0, true});

    // green at station
    mdp.add(1, 2, MdpOutcome{1.0, 0, +5.0, true});   // routed left: correct
    mdp.add(1, 3, MdpOutcome{1.0, 0, -1.0, true});   // routed right: wrong
    for (size_t a : {0, 1}) mdp.add(1, a, MdpOutcome{1.0, 3, 0.0, false});

    // blue at station (mirror)
    mdp.add(2, 3, MdpOutcome{1.0, 0, +5.0, true});
    mdp.add(2, 2, MdpOutcome{1.0, 0, -1.0, true});
    for (size_t a : {0, 1}) mdp.add(2, a, MdpOutcome{1.0, 3, 0.0, false});

    // on the table: every action drops the material
    for (size_t a : {0, 1, 2, 3}) mdp.add(3, a, MdpOutcome{1.0, 0, -3.0, true});

    // s4/s5 stay empty: unreachable, absorbing with value 0
    return mdp;
}

constexpr size_t kInbound = 0;
constexpr size_t kGreenAtStation = 1;
constexpr size_t kBlueAtStation = 2;
constexpr size_t kOnTable = 3;

constexpr size_t kAdvance = 0;        // (rotate=0, dir=0)
constexpr size_t kAdvanceRight = 1;   // (rotate=0, dir=1)
constexpr size_t kRouteLeft = 2;      // (rotate=1, dir=0)
constexpr size_t kRouteRight = 3;     // (rotate=1, dir=1)

}  // namespace testoracle
