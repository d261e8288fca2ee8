#include "landsim/scenario.hpp"

#include "landsim/errors.hpp"
#include "landsim/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace landsim {

using nlohmann::json;

void Scenario::validate() const {
    if (!(duration_cap > 0.0)) throw InvalidParams("duration cap must be positive");
    if (!(tick_rate >= 1.0 && tick_rate <= 10.0)) {
        throw InvalidParams("tick rate must be within 1-10 Hz");
    }
    world.validate();
    camera.validate();
    altitude.validate();
    filter.validate();
    spot.validate();
    noise.validate();
    if (start_altitude < altitude.search_altitude) {
        throw InvalidParams("start altitude must be at or above the search altitude");
    }
    if (!(h_speed > 0.0 && v_speed > 0.0)) throw InvalidParams("speed limits must be positive");
    if (!(map_extent > 0.0 && map_cell_size > 0.0)) {
        throw InvalidParams("map extent and cell size must be positive");
    }
    if (map_cells() < 8 || map_cells() > 2048) throw InvalidParams("map cell count out of range");
    if (safe_classes.empty()) throw InvalidParams("at least one safe class is required");
    ClassSet::with_safe(safe_classes); // rejects Person and duplicates
}

World Scenario::make_world(std::uint64_t trial_seed) const {
    World w = generate_world(Rng::mix(world_seed, trial_seed), world, tick_rate);

    int agent_index = 0;
    for (const ScenarioObstacle& o : obstacles) {
        ObstacleAgent agent;
        agent.kind = o.kind;
        agent.footprint_radius = o.footprint_radius;
        agent.position = o.start;
        agent.script = o.script;
        agent.rng_seed = Rng::mix(trial_seed, 0x0b5 + agent_index);
        w.add_agent(std::move(agent));
        ++agent_index;
    }

    if (random_obstacles && random_obstacles->max_count > 0) {
        const RandomObstacleParams& rp = *random_obstacles;
        Rng rng(Rng::mix(trial_seed, 0xd0b));
        const int count = rng.next_int(rp.max_count + 1);
        for (int i = 0; i < count; ++i) {
            ObstacleAgent agent;
            agent.kind = rp.kind;
            agent.footprint_radius = rp.footprint_radius;
            agent.position = {rng.uniform(-rp.region_half_extent, rp.region_half_extent),
                              rng.uniform(-rp.region_half_extent, rp.region_half_extent)};
            agent.script.type = ScriptType::SpotIncursion;
            agent.script.speed = rng.uniform(rp.speed_min, rp.speed_max);
            agent.script.trigger_agl = rng.uniform(rp.trigger_agl_min, rp.trigger_agl_max);
            agent.script.approach_offset = rng.uniform(0.0, rp.approach_offset_max);
            agent.script.dwell = rng.uniform(rp.dwell_min, rp.dwell_max);
            agent.script.retreat_distance = rp.retreat_distance;
            agent.rng_seed = Rng::mix(trial_seed, 0x5a1 + agent_index + i);
            w.add_agent(std::move(agent));
        }
    }
    return w;
}

namespace {

ObstacleScript script_from_json(const json& j) {
    ObstacleScript s;
    const std::string type = j.at("type").get<std::string>();
    if (type == "static") {
        s.type = ScriptType::Static;
    } else if (type == "waypoints") {
        s.type = ScriptType::Waypoints;
        for (const auto& p : j.at("points")) {
            s.waypoints.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        }
        s.speed = j.value("speed_mps", 1.4);
        s.loop = j.value("loop", false);
    } else if (type == "random_walk") {
        s.type = ScriptType::RandomWalk;
        const auto& r = j.at("region");
        s.region_min = {r.at(0).get<double>(), r.at(1).get<double>()};
        s.region_max = {r.at(2).get<double>(), r.at(3).get<double>()};
        s.speed = j.value("speed_mps", 1.4);
        s.redirect_period = j.value("redirect_period_s", 4.0);
    } else if (type == "spot_incursion") {
        s.type = ScriptType::SpotIncursion;
        s.speed = j.value("speed_mps", 1.4);
        s.trigger_agl = j.value("trigger_agl_m", 6.0);
        s.approach_offset = j.value("approach_offset_m", 0.0);
        s.dwell = j.value("dwell_s", 2.5);
        s.retreat_distance = j.value("retreat_m", 15.0);
    } else {
        throw InvalidParams("unknown obstacle script type: " + type);
    }
    return s;
}

json script_to_json(const ObstacleScript& s) {
    json j;
    switch (s.type) {
        case ScriptType::Static:
            j["type"] = "static";
            break;
        case ScriptType::Waypoints: {
            j["type"] = "waypoints";
            json pts = json::array();
            for (const auto& p : s.waypoints) pts.push_back({p.x, p.y});
            j["points"] = pts;
            j["speed_mps"] = s.speed;
            j["loop"] = s.loop;
            break;
        }
        case ScriptType::RandomWalk:
            j["type"] = "random_walk";
            j["region"] = {s.region_min.x, s.region_min.y, s.region_max.x, s.region_max.y};
            j["speed_mps"] = s.speed;
            j["redirect_period_s"] = s.redirect_period;
            break;
        case ScriptType::SpotIncursion:
            j["type"] = "spot_incursion";
            j["speed_mps"] = s.speed;
            j["trigger_agl_m"] = s.trigger_agl;
            j["approach_offset_m"] = s.approach_offset;
            j["dwell_s"] = s.dwell;
            j["retreat_m"] = s.retreat_distance;
            break;
    }
    return j;
}

} // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParams("cannot open scenario file: " + path);
    json j;
    in >> j;

    if (j.value("schema_version", 0) != 1) {
        throw InvalidParams("unsupported scenario schema version");
    }

    Scenario sc;
    sc.name = j.value("name", std::string("scenario"));
    sc.duration_cap = j.value("duration_cap_s", 600.0);
    sc.tick_rate = j.value("tick_rate_hz", 2.0);

    if (j.contains("world")) {
        const auto& w = j["world"];
        sc.world.extent_x = w.value("extent_x_m", w.value("extent_m", 160.0));
        sc.world.extent_y = w.value("extent_y_m", w.value("extent_m", 160.0));
        sc.world.resolution = w.value("resolution_m", 0.5);
        sc.world.base_class = class_from_name(w.value("base_class", std::string("Grass")));
        sc.world.min_feature_spacing = w.value("min_feature_spacing_m", 0.0);
        if (w.contains("features")) {
            for (const auto& f : w["features"]) {
                sc.world.features.push_back({class_from_name(f.at("class").get<std::string>()),
                                             f.at("fraction").get<double>()});
            }
        }
        sc.world_seed = w.value("seed", std::uint64_t{1});
    }

    if (j.contains("uav")) {
        const auto& u = j["uav"];
        sc.start_x = u.value("start_x", 0.0);
        sc.start_y = u.value("start_y", 0.0);
        sc.start_altitude = u.value("altitude_m", 50.0);
        sc.start_heading = u.value("heading_rad", 0.0);
        sc.h_speed = u.value("h_speed_mps", 5.0);
        sc.v_speed = u.value("v_speed_mps", 2.0);
    }

    if (j.contains("camera")) {
        const auto& c = j["camera"];
        sc.camera.width = c.value("width", 128);
        sc.camera.height = c.value("height", 128);
        sc.camera.fx = c.value("fx", sc.camera.width / 2.0);
        sc.camera.fy = c.value("fy", sc.camera.height / 2.0);
        sc.camera.cx = c.value("cx", sc.camera.width / 2.0);
        sc.camera.cy = c.value("cy", sc.camera.height / 2.0);
    }

    if (j.contains("map")) {
        sc.map_extent = j["map"].value("extent_m", 64.0);
        sc.map_cell_size = j["map"].value("cell_size_m", 0.25);
    }

    if (j.contains("safe_classes")) {
        sc.safe_classes.clear();
        for (const auto& name : j["safe_classes"]) {
            sc.safe_classes.push_back(class_from_name(name.get<std::string>()));
        }
    }

    if (j.contains("altitude")) {
        const auto& a = j["altitude"];
        sc.altitude.search_altitude = a.value("search_m", 15.0);
        sc.altitude.min_radius_altitude = a.value("min_radius_m", 5.0);
        sc.altitude.landing_altitude = a.value("landing_m", 2.0);
        sc.altitude.pause_duration = a.value("pause_s", 5.0);
        sc.altitude.touchdown_agl = a.value("touchdown_m", 0.05);
        sc.altitude.waypoint_tolerance = a.value("waypoint_tolerance_m", 0.25);
    }

    if (j.contains("filter")) {
        sc.filter.alpha = j["filter"].value("alpha", 0.1);
        sc.filter.person_latch_threshold = j["filter"].value("person_latch_threshold", 0.2);
    }

    if (j.contains("spot")) {
        sc.spot.r_safe = j["spot"].value("r_safe_m", 3.0);
        sc.spot.history_capacity = j["spot"].value("history_capacity", 16);
        sc.spot.history_dedup_radius = j["spot"].value("history_dedup_radius_m", 3.0);
    }

    if (j.contains("noise")) {
        const auto& n = j["noise"];
        if (n.contains("file")) {
            sc.noise = load_noise_model(n["file"].get<std::string>());
        } else {
            sc.noise = default_noise_model(n.value("person_fp_rate", 0.0));
        }
        if (n.contains("concentration")) sc.noise.concentration = n["concentration"].get<double>();
        if (n.contains("person_diagonal")) {
            // Rescale the Person row around the requested diagonal.
            const double d = n["person_diagonal"].get<double>();
            const int p = kPersonIndex;
            const double old_diag = sc.noise.confusion[p * kNumClasses + p];
            const double old_off = 1.0 - old_diag;
            for (int c = 0; c < kNumClasses; ++c) {
                if (c == p) continue;
                sc.noise.confusion[p * kNumClasses + c] *=
                    (old_off > 0.0) ? (1.0 - d) / old_off : 0.0;
            }
            if (old_off <= 0.0 && d < 1.0) {
                sc.noise.confusion[p * kNumClasses + kBackgroundIndex] = 1.0 - d;
            }
            sc.noise.confusion[p * kNumClasses + p] = d;
        }
        sc.noise.seed = n.value("seed", std::uint64_t{0});
    }

    if (j.contains("obstacles")) {
        for (const auto& o : j["obstacles"]) {
            ScenarioObstacle ob;
            ob.kind = class_from_name(o.value("kind", std::string("Person")));
            ob.footprint_radius = o.value("footprint_radius_m", 0.4);
            if (o.contains("start")) {
                ob.start = {o["start"].at(0).get<double>(), o["start"].at(1).get<double>()};
            }
            ob.script = script_from_json(o.at("script"));
            sc.obstacles.push_back(std::move(ob));
        }
    }

    if (j.contains("random_obstacles")) {
        const auto& r = j["random_obstacles"];
        RandomObstacleParams rp;
        rp.max_count = r.value("max_count", 0);
        rp.kind = class_from_name(r.value("kind", std::string("Person")));
        rp.footprint_radius = r.value("footprint_radius_m", 0.4);
        rp.region_half_extent = r.value("region_half_extent_m", 25.0);
        rp.speed_min = r.value("speed_min_mps", 1.0);
        rp.speed_max = r.value("speed_max_mps", 1.8);
        rp.trigger_agl_min = r.value("trigger_agl_min_m", 3.5);
        rp.trigger_agl_max = r.value("trigger_agl_max_m", 9.0);
        rp.approach_offset_max = r.value("approach_offset_max_m", 2.5);
        rp.dwell_min = r.value("dwell_min_s", 1.0);
        rp.dwell_max = r.value("dwell_max_s", 3.5);
        rp.retreat_distance = r.value("retreat_m", 15.0);
        sc.random_obstacles = rp;
    }

    sc.validate();
    return sc;
}

void save_scenario(const Scenario& sc, const std::string& path) {
    json j;
    j["schema_version"] = 1;
    j["name"] = sc.name;
    j["duration_cap_s"] = sc.duration_cap;
    j["tick_rate_hz"] = sc.tick_rate;

    json w;
    w["extent_x_m"] = sc.world.extent_x;
    w["extent_y_m"] = sc.world.extent_y;
    w["resolution_m"] = sc.world.resolution;
    w["base_class"] = class_name(sc.world.base_class);
    w["min_feature_spacing_m"] = sc.world.min_feature_spacing;
    w["seed"] = sc.world_seed;
    json feats = json::array();
    for (const auto& f : sc.world.features) {
        feats.push_back({{"class", class_name(f.cls)}, {"fraction", f.fraction}});
    }
    w["features"] = feats;
    j["world"] = w;

    j["uav"] = {{"start_x", sc.start_x},     {"start_y", sc.start_y},
                {"altitude_m", sc.start_altitude}, {"heading_rad", sc.start_heading},
                {"h_speed_mps", sc.h_speed}, {"v_speed_mps", sc.v_speed}};
    j["camera"] = {{"width", sc.camera.width}, {"height", sc.camera.height},
                   {"fx", sc.camera.fx},       {"fy", sc.camera.fy},
                   {"cx", sc.camera.cx},       {"cy", sc.camera.cy}};
    j["map"] = {{"extent_m", sc.map_extent}, {"cell_size_m", sc.map_cell_size}};
    json safe = json::array();
    for (ClassId c : sc.safe_classes) safe.push_back(class_name(c));
    j["safe_classes"] = safe;
    j["altitude"] = {{"search_m", sc.altitude.search_altitude},
                     {"min_radius_m", sc.altitude.min_radius_altitude},
                     {"landing_m", sc.altitude.landing_altitude},
                     {"pause_s", sc.altitude.pause_duration},
                     {"touchdown_m", sc.altitude.touchdown_agl},
                     {"waypoint_tolerance_m", sc.altitude.waypoint_tolerance}};
    j["filter"] = {{"alpha", sc.filter.alpha},
                   {"person_latch_threshold", sc.filter.person_latch_threshold}};
    j["spot"] = {{"r_safe_m", sc.spot.r_safe},
                 {"history_capacity", sc.spot.history_capacity},
                 {"history_dedup_radius_m", sc.spot.history_dedup_radius}};
    j["noise"] = {{"concentration", sc.noise.concentration}, {"seed", sc.noise.seed}};

    json obs = json::array();
    for (const auto& o : sc.obstacles) {
        json jo;
        jo["kind"] = class_name(o.kind);
        jo["footprint_radius_m"] = o.footprint_radius;
        jo["start"] = {o.start.x, o.start.y};
        jo["script"] = script_to_json(o.script);
        obs.push_back(jo);
    }
    j["obstacles"] = obs;

    if (sc.random_obstacles) {
        const auto& rp = *sc.random_obstacles;
        j["random_obstacles"] = {{"max_count", rp.max_count},
                                 {"kind", class_name(rp.kind)},
                                 {"footprint_radius_m", rp.footprint_radius},
                                 {"region_half_extent_m", rp.region_half_extent},
                                 {"speed_min_mps", rp.speed_min},
                                 {"speed_max_mps", rp.speed_max},
                                 {"trigger_agl_min_m", rp.trigger_agl_min},
                                 {"trigger_agl_max_m", rp.trigger_agl_max},
                                 {"approach_offset_max_m", rp.approach_offset_max},
                                 {"dwell_min_s", rp.dwell_min},
                                 {"dwell_max_s", rp.dwell_max},
                                 {"retreat_m", rp.retreat_distance}};
    }

    std::ofstream out(path);
    if (!out) throw InvalidParams("cannot write scenario file: " + path);
    out << j.dump(2) << "\n";
}

} // namespace landsim
