#pragma once

#include "landsim/geometry.hpp"
#include "landsim/spot_detection.hpp"

#include <functional>
#include <optional>
#include <string>

namespace landsim {

struct AltitudeConfig {
    double search_altitude = 15.0;    // search for spots at or above this AGL
    double min_radius_altitude = 5.0; // below: only dynamic objects are checked
    double landing_altitude = 2.0;    // below: committed, no further decisions
    double pause_duration = 5.0;      // seconds to wait out a dynamic object
    double touchdown_agl = 0.05;      // terminal condition
    double waypoint_tolerance = 0.25; // horizontal arrival radius, meters

    void validate() const; // throws InvalidParams
};

// The three sequences plus the two terminal states.
enum class Sequence { SpotAvailable, TowardSpot, Landing, Landed, Aborted };

enum class CommandType {
    HoldPosition,
    ForwardSearch,
    GotoWaypoint,
    Descend,
    Climb,
    CommitLand,
    Pause,
};

struct FlightCommand {
    CommandType type = CommandType::HoldPosition;
    double heading = 0.0;               // ForwardSearch
    GroundPoint waypoint{};             // GotoWaypoint
    double altitude = 0.0;              // GotoWaypoint: altitude to hold; Climb: target
    std::optional<double> descent_rate; // Descend; empty = platform default

    static FlightCommand hold() { return {}; }
    static FlightCommand forward_search(double heading) {
        FlightCommand c;
        c.type = CommandType::ForwardSearch;
        c.heading = heading;
        return c;
    }
    static FlightCommand goto_waypoint(const GroundPoint& p, double altitude) {
        FlightCommand c;
        c.type = CommandType::GotoWaypoint;
        c.waypoint = p;
        c.altitude = altitude;
        return c;
    }
    static FlightCommand descend() {
        FlightCommand c;
        c.type = CommandType::Descend;
        return c;
    }
    static FlightCommand climb(double altitude) {
        FlightCommand c;
        c.type = CommandType::Climb;
        c.altitude = altitude;
        return c;
    }
    static FlightCommand commit_land() {
        FlightCommand c;
        c.type = CommandType::CommitLand;
        return c;
    }
    static FlightCommand pause() {
        FlightCommand c;
        c.type = CommandType::Pause;
        return c;
    }
};

struct BehaviorState {
    Sequence sequence = Sequence::SpotAvailable;
    std::optional<LandingSpot> target;
    double pause_timer = 0.0; // seconds remaining, within [0, pause_duration]
    bool pause_active = false;
    bool climb_back = false; // regaining search altitude before heading to target
};

// Everything the controller may look at on one tick. All of it derives from
// segmentation frames and the UAV pose; the controller never sees the world.
struct BtInputs {
    double agl = 0.0;
    double dt = 0.5;
    GroundPoint position{};
    double heading = 0.0;
    std::optional<LandingSpot> candidate;            // selection result (search ticks)
    std::optional<SpotValidation> target_validation; // for the active target
    bool dynamic_object = false; // person evidence inside the camera footprint
    SpotHistory* history = nullptr;
    const ClassSet* classes = nullptr;
    std::function<SpotValidation(const LandingSpot&)> validate; // for history retrieval
};

// One synchronous controller step. Total and deterministic: every
// (state, input) pair yields exactly one command.
//  - SpotAvailable, AGL >= search: adopt the candidate (stored in history)
//    or keep flying ahead; below search altitude it climbs back first.
//  - TowardSpot: waypoint above the spot, then descent with per-tick
//    re-validation; invalid -> climb and fall back to a history spot, or
//    return to search. Below min_radius_altitude the validation input is
//    ignored and only the dynamic-object flag is checked: pause up to
//    pause_duration, resume when clear, climb out when it persists.
//  - Landing (AGL <= landing_altitude): CommitLand unconditionally;
//    touchdown at AGL <= touchdown_agl ends in Landed.
// Negative or non-finite AGL aborts with HoldPosition.
FlightCommand bt_tick(BehaviorState& state, const BtInputs& in, const AltitudeConfig& config);

const char* to_string(Sequence s);
const char* to_string(CommandType c);
std::string describe(const FlightCommand& c);

} // namespace landsim
