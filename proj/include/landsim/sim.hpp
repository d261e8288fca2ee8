#pragma once

#include "landsim/classes.hpp"
#include "landsim/geometry.hpp"
#include "landsim/landing_bt.hpp"
#include "landsim/rng.hpp"
#include "landsim/segmentation.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace landsim {

// Procedural terrain description: a base class plus painted features
// targeting given area fractions.
struct WorldParams {
    double extent_x = 160.0; // meters, centered on the world origin
    double extent_y = 160.0;
    double resolution = 0.5; // meters per cell
    ClassId base_class = ClassId::Grass;

    struct Feature {
        ClassId cls = ClassId::Road;
        double fraction = 0.0; // target share of total area
    };
    std::vector<Feature> features;

    // Minimum clearance kept between painted features (meters). Zero packs
    // them freely.
    double min_feature_spacing = 0.0;

    void validate() const; // throws InvalidParams
};

// Ground-truth semantic grid, world-axis aligned, centered on the origin.
class TerrainGrid {
public:
    TerrainGrid(int x_cells, int y_cells, double resolution, ClassId fill);

    int x_cells() const { return x_cells_; }
    int y_cells() const { return y_cells_; }
    double resolution() const { return resolution_; }
    double extent_x() const { return x_cells_ * resolution_; }
    double extent_y() const { return y_cells_ * resolution_; }

    ClassId at(int ix, int iy) const { return cells_[iy * x_cells_ + ix]; }
    void set(int ix, int iy, ClassId c) { cells_[iy * x_cells_ + ix] = c; }

    // Background outside the grid.
    ClassId class_at_world(const GroundPoint& p) const;
    GroundPoint cell_center_world(int ix, int iy) const;

private:
    int x_cells_, y_cells_;
    double resolution_;
    std::vector<ClassId> cells_;
};

enum class ScriptType { Static, Waypoints, RandomWalk, SpotIncursion };

struct ObstacleScript {
    ScriptType type = ScriptType::Static;

    // Waypoints
    std::vector<GroundPoint> waypoints;
    double speed = 1.4; // typical walking pace
    bool loop = false;

    // RandomWalk
    GroundPoint region_min{};
    GroundPoint region_max{};
    double redirect_period = 4.0; // seconds between heading changes

    // SpotIncursion: walk into the pipeline's active landing spot once the
    // UAV descends below trigger_agl, linger, then leave.
    double trigger_agl = 6.0;
    double approach_offset = 0.0; // stop this far short of the spot center
    double dwell = 2.5;
    double retreat_distance = 15.0;
};

struct ObstacleAgent {
    ClassId kind = ClassId::Person; // Person or Vehicle
    GroundPoint position{};
    double footprint_radius = 0.4;
    ObstacleScript script;

    // runtime state
    std::uint64_t rng_seed = 0;
    std::size_t waypoint_index = 0;
    double walk_timer = 0.0;
    double walk_heading = 0.0;
    int incursion_phase = 0; // 0 idle, 1 approach, 2 dwell, 3 retreat, 4 done
    double dwell_remaining = 0.0;
    GroundPoint approach_target{};
    double retreat_heading = 0.0;
    double retreat_remaining = 0.0;
};

struct UAVState {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0; // AGL under the flat-ground assumption
    double heading = 0.0;
    double h_speed_limit = 5.0; // m/s
    double v_speed_limit = 2.0; // m/s

    GroundPoint ground_position() const { return {x, y}; }
    Eigen::Vector3d position() const { return {x, y, z}; }
};

class World {
public:
    World(TerrainGrid terrain, double tick_rate_hz);

    const TerrainGrid& terrain() const { return terrain_; }
    double clock() const { return clock_; }
    double tick_rate() const { return tick_rate_; }

    void add_agent(ObstacleAgent agent) { agents_.push_back(std::move(agent)); }
    const std::vector<ObstacleAgent>& agents() const { return agents_; }
    std::vector<ObstacleAgent>& agents() { return agents_; }

    // Pipeline outputs the scripted incursions react to. The perception
    // pipeline itself never reads the world; this channel runs the other way.
    void set_pipeline_observables(const std::optional<GroundPoint>& active_spot, double uav_agl) {
        active_spot_ = active_spot;
        uav_agl_ = uav_agl;
    }
    const std::optional<GroundPoint>& active_spot() const { return active_spot_; }
    double uav_agl() const { return uav_agl_; }

    void advance_clock(double dt) { clock_ += dt; }

private:
    TerrainGrid terrain_;
    double tick_rate_;
    double clock_ = 0.0;
    std::vector<ObstacleAgent> agents_;
    std::optional<GroundPoint> active_spot_;
    double uav_agl_ = 1e9;
};

// Seeded procedural world; identical (seed, params) give identical grids.
World generate_world(std::uint64_t seed, const WorldParams& params, double tick_rate_hz = 2.0);

// Advances agents along their scripts, then integrates the UAV point-mass
// toward the command at capped speeds, then the clock.
void step(World& world, UAVState& uav, const FlightCommand& command, double dt);

// Ground-truth class image: per pixel, back-project the pixel center to
// z = 0 and sample the terrain; agents overdraw their footprint discs in
// order. Pixels beyond the terrain read Background.
ClassImage render_view(const World& world, const RigidPose& pose, const CameraModel& cam);

// Ground-truth oracle for metrics only: true iff any agent's footprint disc
// intersects the disc of `radius` around `center`.
bool obstacle_in_radius(const World& world, const GroundPoint& center, double radius);

} // namespace landsim
