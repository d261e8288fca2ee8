#include "landsim/landing_bt.hpp"

#include "landsim/errors.hpp"

#include <cmath>
#include <cstdio>

namespace landsim {

namespace {

constexpr double kAltitudeSlack = 1e-9;

FlightCommand toward_spot_tick(BehaviorState& state, const BtInputs& in,
                               const AltitudeConfig& config, bool adopted_this_tick) {
    // Committed regime first: nothing can stop the landing below this line.
    if (in.agl <= config.landing_altitude) {
        state.sequence = Sequence::Landing;
        state.pause_active = false;
        state.pause_timer = 0.0;
        return FlightCommand::commit_land();
    }

    if (state.climb_back) {
        if (in.agl < config.search_altitude - kAltitudeSlack) {
            return FlightCommand::climb(config.search_altitude);
        }
        state.climb_back = false;
    }

    if (in.agl <= config.min_radius_altitude) {
        // The clearance disc fills the camera image here, so spot validation
        // carries no extra information: only dynamic objects are checked.
        if (in.dynamic_object) {
            if (!state.pause_active) {
                state.pause_active = true;
                state.pause_timer = config.pause_duration;
                return FlightCommand::pause();
            }
            state.pause_timer = std::max(0.0, state.pause_timer - in.dt);
            if (state.pause_timer <= kAltitudeSlack) {
                // Obstacle persisted: back to the search sequence.
                state.pause_active = false;
                state.pause_timer = 0.0;
                state.target.reset();
                state.climb_back = false;
                state.sequence = Sequence::SpotAvailable;
                return FlightCommand::climb(config.search_altitude);
            }
            return FlightCommand::pause();
        }
        state.pause_active = false;
        state.pause_timer = 0.0;
        return FlightCommand::descend();
    }

    // Above the minimum-radius altitude the spot is re-validated every tick.
    const bool invalid = !adopted_this_tick && in.target_validation.has_value() &&
                         !in.target_validation->valid;
    if (invalid) {
        std::optional<LandingSpot> fallback;
        if (in.history != nullptr && in.classes != nullptr && in.validate) {
            fallback = in.history->best_alternative(state.target, *in.classes, in.validate);
        }
        if (fallback) {
            state.target = fallback;
            state.climb_back = true;
        } else {
            state.target.reset();
            state.sequence = Sequence::SpotAvailable;
        }
        return FlightCommand::climb(config.search_altitude);
    }

    const double dx = state.target->world.x - in.position.x;
    const double dy = state.target->world.y - in.position.y;
    if (std::hypot(dx, dy) > config.waypoint_tolerance) {
        return FlightCommand::goto_waypoint(state.target->world, in.agl);
    }
    return FlightCommand::descend();
}

} // namespace

void AltitudeConfig::validate() const {
    if (!(landing_altitude < min_radius_altitude && min_radius_altitude < search_altitude)) {
        throw InvalidParams("altitude thresholds must satisfy landing < min_radius < search");
    }
    if (!(pause_duration > 0.0)) throw InvalidParams("pause duration must be positive");
    if (!(touchdown_agl > 0.0 && touchdown_agl < landing_altitude)) {
        throw InvalidParams("touchdown epsilon must be within the landing band");
    }
    if (!(waypoint_tolerance > 0.0)) throw InvalidParams("waypoint tolerance must be positive");
}

FlightCommand bt_tick(BehaviorState& state, const BtInputs& in, const AltitudeConfig& config) {
    config.validate();

    if (!std::isfinite(in.agl) || in.agl < 0.0) {
        state.sequence = Sequence::Aborted;
        state.target.reset();
        state.pause_active = false;
        state.pause_timer = 0.0;
        return FlightCommand::hold();
    }

    switch (state.sequence) {
        case Sequence::Aborted:
        case Sequence::Landed:
            return FlightCommand::hold();

        case Sequence::Landing:
            if (in.agl <= config.touchdown_agl) {
                state.sequence = Sequence::Landed;
            }
            return FlightCommand::commit_land();

        case Sequence::TowardSpot:
            if (!state.target) { // defensive; the contract keeps a target here
                state.sequence = Sequence::SpotAvailable;
                break;
            }
            return toward_spot_tick(state, in, config, /*adopted_this_tick=*/false);

        case Sequence::SpotAvailable:
            break;
    }

    // SpotAvailable sequence.
    if (in.agl < config.search_altitude - kAltitudeSlack) {
        return FlightCommand::climb(config.search_altitude);
    }
    if (in.candidate) {
        state.target = in.candidate;
        state.sequence = Sequence::TowardSpot;
        state.climb_back = false;
        if (in.history != nullptr) in.history->push(*in.candidate);
        return toward_spot_tick(state, in, config, /*adopted_this_tick=*/true);
    }
    return FlightCommand::forward_search(in.heading);
}

const char* to_string(Sequence s) {
    switch (s) {
        case Sequence::SpotAvailable: return "SpotAvailable";
        case Sequence::TowardSpot: return "TowardSpot";
        case Sequence::Landing: return "Landing";
        case Sequence::Landed: return "Landed";
        case Sequence::Aborted: return "Aborted";
    }
    return "?";
}

const char* to_string(CommandType c) {
    switch (c) {
        case CommandType::HoldPosition: return "HoldPosition";
        case CommandType::ForwardSearch: return "ForwardSearch";
        case CommandType::GotoWaypoint: return "GotoWaypoint";
        case CommandType::Descend: return "Descend";
        case CommandType::Climb: return "Climb";
        case CommandType::CommitLand: return "CommitLand";
        case CommandType::Pause: return "Pause";
    }
    return "?";
}

std::string describe(const FlightCommand& c) {
    char buf[96];
    switch (c.type) {
        case CommandType::ForwardSearch:
            std::snprintf(buf, sizeof(buf), "ForwardSearch(%.3f)", c.heading);
            return buf;
        case CommandType::GotoWaypoint:
            std::snprintf(buf, sizeof(buf), "GotoWaypoint(%.2f,%.2f,%.2f)", c.waypoint.x,
                          c.waypoint.y, c.altitude);
            return buf;
        case CommandType::Climb:
            std::snprintf(buf, sizeof(buf), "Climb(%.2f)", c.altitude);
            return buf;
        default:
            return to_string(c.type);
    }
}

} // namespace landsim
