#pragma once

#include "landsim/classes.hpp"
#include "landsim/landing_bt.hpp"
#include "landsim/segmentation.hpp"
#include "landsim/semantic_map.hpp"
#include "landsim/sim.hpp"
#include "landsim/spot_detection.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace landsim {

// Seeded randomized incursion agents, instantiated per trial.
struct RandomObstacleParams {
    int max_count = 0; // per-trial count drawn uniformly from [0, max_count]
    ClassId kind = ClassId::Person;
    double footprint_radius = 0.4;
    double region_half_extent = 25.0; // spawn square around the world origin
    double speed_min = 1.0;
    double speed_max = 1.8;
    double trigger_agl_min = 3.5;
    double trigger_agl_max = 9.0;
    double approach_offset_max = 2.5;
    double dwell_min = 1.0;
    double dwell_max = 3.5;
    double retreat_distance = 15.0;
};

struct ScenarioObstacle {
    ClassId kind = ClassId::Person;
    double footprint_radius = 0.4;
    GroundPoint start{};
    ObstacleScript script;
};

// Complete, seedable trial description. The schema is versioned; see the
// README for the JSON layout.
struct Scenario {
    std::string name = "scenario";
    double duration_cap = 600.0; // simulated seconds
    double tick_rate = 2.0;      // Hz

    WorldParams world;
    std::uint64_t world_seed = 1;

    // UAV start
    double start_x = 0.0;
    double start_y = 0.0;
    double start_altitude = 50.0;
    double start_heading = 0.0;
    double h_speed = 5.0;
    double v_speed = 2.0;

    CameraModel camera{64.0, 64.0, 64.0, 64.0, 128, 128};

    double map_extent = 64.0;
    double map_cell_size = 0.25;

    std::vector<ClassId> safe_classes{ClassId::Grass};

    AltitudeConfig altitude;
    FilterConfig filter;
    SpotConfig spot;

    NoiseModel noise = default_noise_model();

    std::vector<ScenarioObstacle> obstacles;
    std::optional<RandomObstacleParams> random_obstacles;

    void validate() const; // throws InvalidParams

    ClassSet class_set() const { return ClassSet::with_safe(safe_classes); }
    int map_cells() const { return static_cast<int>(std::lround(map_extent / map_cell_size)); }

    // Builds the trial world: terrain from (world_seed mixed with the trial
    // seed), explicit obstacles, then randomized ones.
    World make_world(std::uint64_t trial_seed) const;
};

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

} // namespace landsim
