#include "landsim/sim.hpp"

#include "landsim/errors.hpp"

#include <algorithm>
#include <cmath>

namespace landsim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925;

struct Shape {
    // 0 strip (infinite band), 1 rectangle, 2 ellipse
    int kind = 1;
    GroundPoint center{};
    double dir_x = 1.0, dir_y = 0.0; // strip normal direction handled below
    double a = 1.0, b = 1.0;         // half width/height or radii

    bool inside(const GroundPoint& p, double inflate) const {
        const double dx = p.x - center.x;
        const double dy = p.y - center.y;
        switch (kind) {
            case 0: {
                // distance from the strip axis line
                const double d = std::abs(dx * dir_y - dy * dir_x);
                return d <= a + inflate;
            }
            case 1:
                return std::abs(dx) <= a + inflate && std::abs(dy) <= b + inflate;
            default: {
                const double ra = a + inflate;
                const double rb = b + inflate;
                return (dx * dx) / (ra * ra) + (dy * dy) / (rb * rb) <= 1.0;
            }
        }
    }
};

Shape random_shape_for(ClassId cls, const TerrainGrid& grid, Rng& rng) {
    Shape s;
    s.center = {rng.uniform(-grid.extent_x() / 2.0, grid.extent_x() / 2.0),
                rng.uniform(-grid.extent_y() / 2.0, grid.extent_y() / 2.0)};
    switch (cls) {
        case ClassId::Road:
        case ClassId::TrainTrack: {
            s.kind = 0;
            const double angle = rng.uniform(0.0, kTwoPi);
            s.dir_x = std::cos(angle);
            s.dir_y = std::sin(angle);
            s.a = rng.uniform(1.5, 3.0); // half width
            break;
        }
        case ClassId::Water: {
            s.kind = 2;
            s.a = rng.uniform(4.0, 12.0);
            s.b = rng.uniform(4.0, 12.0);
            break;
        }
        default: {
            s.kind = 1;
            s.a = rng.uniform(3.0, 8.0);
            s.b = rng.uniform(3.0, 8.0);
            break;
        }
    }
    return s;
}

void move_toward(GroundPoint& pos, const GroundPoint& goal, double max_step) {
    const double dx = goal.x - pos.x;
    const double dy = goal.y - pos.y;
    const double d = std::hypot(dx, dy);
    if (d <= max_step || d < 1e-12) {
        pos = goal;
        return;
    }
    pos.x += dx / d * max_step;
    pos.y += dy / d * max_step;
}

void step_agent(ObstacleAgent& agent, const World& world, double dt) {
    switch (agent.script.type) {
        case ScriptType::Static:
            return;

        case ScriptType::Waypoints: {
            double remaining = agent.script.speed * dt;
            while (remaining > 1e-12 && agent.waypoint_index < agent.script.waypoints.size()) {
                const GroundPoint& goal = agent.script.waypoints[agent.waypoint_index];
                const double d = std::hypot(goal.x - agent.position.x, goal.y - agent.position.y);
                if (d <= remaining) {
                    agent.position = goal;
                    remaining -= d;
                    ++agent.waypoint_index;
                    if (agent.waypoint_index == agent.script.waypoints.size() &&
                        agent.script.loop) {
                        agent.waypoint_index = 0;
                    }
                } else {
                    move_toward(agent.position, goal, remaining);
                    remaining = 0.0;
                }
            }
            return;
        }

        case ScriptType::RandomWalk: {
            agent.walk_timer -= dt;
            if (agent.walk_timer <= 0.0) {
                agent.rng_seed = Rng::mix(agent.rng_seed, 0x5eed);
                agent.walk_heading = Rng(agent.rng_seed).uniform(0.0, kTwoPi);
                agent.walk_timer = agent.script.redirect_period;
            }
            double nx = agent.position.x + std::cos(agent.walk_heading) * agent.script.speed * dt;
            double ny = agent.position.y + std::sin(agent.walk_heading) * agent.script.speed * dt;
            const auto& lo = agent.script.region_min;
            const auto& hi = agent.script.region_max;
            if (nx < lo.x || nx > hi.x) {
                agent.walk_heading = 3.14159265358979323846 - agent.walk_heading;
                nx = std::clamp(nx, lo.x, hi.x);
            }
            if (ny < lo.y || ny > hi.y) {
                agent.walk_heading = -agent.walk_heading;
                ny = std::clamp(ny, lo.y, hi.y);
            }
            agent.position = {nx, ny};
            return;
        }

        case ScriptType::SpotIncursion: {
            switch (agent.incursion_phase) {
                case 0: // waiting for the UAV to descend onto a spot
                    if (world.active_spot() && world.uav_agl() <= agent.script.trigger_agl) {
                        const GroundPoint spot = *world.active_spot();
                        const double dx = spot.x - agent.position.x;
                        const double dy = spot.y - agent.position.y;
                        const double d = std::hypot(dx, dy);
                        const double stop = std::min(agent.script.approach_offset, d);
                        agent.approach_target = {spot.x - (d > 1e-9 ? dx / d * stop : 0.0),
                                                 spot.y - (d > 1e-9 ? dy / d * stop : 0.0)};
                        agent.retreat_heading = (d > 1e-9) ? std::atan2(-dy, -dx) : 0.0;
                        agent.incursion_phase = 1;
                    }
                    return;
                case 1:
                    move_toward(agent.position, agent.approach_target,
                                agent.script.speed * dt);
                    if (std::hypot(agent.approach_target.x - agent.position.x,
                                   agent.approach_target.y - agent.position.y) < 1e-9) {
                        agent.incursion_phase = 2;
                        agent.dwell_remaining = agent.script.dwell;
                    }
                    return;
                case 2:
                    agent.dwell_remaining -= dt;
                    if (agent.dwell_remaining <= 0.0) {
                        agent.incursion_phase = 3;
                        agent.retreat_remaining = agent.script.retreat_distance;
                    }
                    return;
                case 3: {
                    const double stepd = std::min(agent.script.speed * dt,
                                                  agent.retreat_remaining);
                    agent.position.x += std::cos(agent.retreat_heading) * stepd;
                    agent.position.y += std::sin(agent.retreat_heading) * stepd;
                    agent.retreat_remaining -= stepd;
                    if (agent.retreat_remaining <= 1e-9) agent.incursion_phase = 4;
                    return;
                }
                default:
                    return;
            }
        }
    }
}

} // namespace

void WorldParams::validate() const {
    if (extent_x <= 0.0 || extent_y <= 0.0 || resolution <= 0.0) {
        throw InvalidParams("world extents and resolution must be positive");
    }
    if (extent_x / resolution > 4096 || extent_y / resolution > 4096) {
        throw InvalidParams("world grid too large");
    }
    double total = 0.0;
    for (const auto& f : features) {
        if (f.fraction < 0.0) throw InvalidParams("feature fractions must be non-negative");
        if (f.cls == base_class) throw InvalidParams("feature class equals the base class");
        total += f.fraction;
    }
    if (total > 0.95) throw InvalidParams("feature fractions leave no room for the base class");
    if (min_feature_spacing < 0.0) throw InvalidParams("feature spacing must be >= 0");
}

TerrainGrid::TerrainGrid(int x_cells, int y_cells, double resolution, ClassId fill)
    : x_cells_(x_cells), y_cells_(y_cells), resolution_(resolution),
      cells_(static_cast<std::size_t>(x_cells) * y_cells, fill) {
    if (x_cells <= 0 || y_cells <= 0 || resolution <= 0.0) {
        throw InvalidParams("terrain dimensions must be positive");
    }
}

ClassId TerrainGrid::class_at_world(const GroundPoint& p) const {
    const int ix = static_cast<int>(std::floor((p.x + extent_x() / 2.0) / resolution_));
    const int iy = static_cast<int>(std::floor((p.y + extent_y() / 2.0) / resolution_));
    if (ix < 0 || ix >= x_cells_ || iy < 0 || iy >= y_cells_) return ClassId::Background;
    return at(ix, iy);
}

GroundPoint TerrainGrid::cell_center_world(int ix, int iy) const {
    return {-extent_x() / 2.0 + (ix + 0.5) * resolution_,
            -extent_y() / 2.0 + (iy + 0.5) * resolution_};
}

World::World(TerrainGrid terrain, double tick_rate_hz)
    : terrain_(std::move(terrain)), tick_rate_(tick_rate_hz) {
    if (!(tick_rate_hz >= 1.0 && tick_rate_hz <= 10.0)) {
        throw InvalidParams("tick rate must be within 1-10 Hz");
    }
}

World generate_world(std::uint64_t seed, const WorldParams& params, double tick_rate_hz) {
    params.validate();
    const int xc = static_cast<int>(std::lround(params.extent_x / params.resolution));
    const int yc = static_cast<int>(std::lround(params.extent_y / params.resolution));
    TerrainGrid grid(xc, yc, params.resolution, params.base_class);
    Rng rng(Rng::mix(seed, 0x7e77a11d));

    const std::size_t total = static_cast<std::size_t>(xc) * yc;
    for (const auto& feature : params.features) {
        const std::size_t target = static_cast<std::size_t>(feature.fraction * total);
        std::size_t painted = 0;
        int attempts = 0;
        while (painted < target && attempts < 500) {
            ++attempts;
            const Shape shape = random_shape_for(feature.cls, grid, rng);

            // Scan the inflated shape bounds only; strips span the grid.
            int y_lo = 0, y_hi = yc - 1, x_lo = 0, x_hi = xc - 1;
            if (shape.kind != 0) {
                const double pad = std::max(shape.a, shape.b) + params.min_feature_spacing +
                                   params.resolution;
                x_lo = std::max(0, static_cast<int>((shape.center.x - pad + params.extent_x / 2) /
                                                    params.resolution));
                x_hi = std::min(xc - 1,
                                static_cast<int>((shape.center.x + pad + params.extent_x / 2) /
                                                 params.resolution));
                y_lo = std::max(0, static_cast<int>((shape.center.y - pad + params.extent_y / 2) /
                                                    params.resolution));
                y_hi = std::min(yc - 1,
                                static_cast<int>((shape.center.y + pad + params.extent_y / 2) /
                                                 params.resolution));
            }

            // The shape plus its spacing ring must be free of other features.
            bool clear = true;
            std::vector<std::size_t> cells;
            for (int iy = y_lo; iy <= y_hi && clear; ++iy) {
                for (int ix = x_lo; ix <= x_hi; ++ix) {
                    const GroundPoint c = grid.cell_center_world(ix, iy);
                    if (!shape.inside(c, params.min_feature_spacing)) continue;
                    if (grid.at(ix, iy) != params.base_class) {
                        clear = false;
                        break;
                    }
                    if (shape.inside(c, 0.0)) {
                        cells.push_back(static_cast<std::size_t>(iy) * xc + ix);
                    }
                }
            }
            if (!clear || cells.empty()) continue;
            for (std::size_t i : cells) {
                grid.set(static_cast<int>(i % xc), static_cast<int>(i / xc), feature.cls);
            }
            painted += cells.size();
        }
    }
    return World(std::move(grid), tick_rate_hz);
}

void step(World& world, UAVState& uav, const FlightCommand& command, double dt) {
    if (!(dt > 0.0)) throw InvalidParams("dt must be positive");

    for (ObstacleAgent& agent : world.agents()) {
        step_agent(agent, world, dt);
    }

    const double h_step = uav.h_speed_limit * dt;
    const double v_step = uav.v_speed_limit * dt;
    switch (command.type) {
        case CommandType::HoldPosition:
        case CommandType::Pause:
            break;
        case CommandType::ForwardSearch: {
            uav.heading = command.heading;
            uav.x += std::cos(uav.heading) * h_step;
            uav.y += std::sin(uav.heading) * h_step;
            break;
        }
        case CommandType::GotoWaypoint: {
            const double dx = command.waypoint.x - uav.x;
            const double dy = command.waypoint.y - uav.y;
            const double d = std::hypot(dx, dy);
            if (d > 1e-9) {
                uav.heading = std::atan2(dy, dx);
                GroundPoint p{uav.x, uav.y};
                move_toward(p, command.waypoint, h_step);
                uav.x = p.x;
                uav.y = p.y;
            }
            const double dz = command.altitude - uav.z;
            uav.z += std::clamp(dz, -v_step, v_step);
            break;
        }
        case CommandType::Descend: {
            const double rate =
                std::min(command.descent_rate.value_or(uav.v_speed_limit), uav.v_speed_limit);
            uav.z = std::max(0.0, uav.z - rate * dt);
            break;
        }
        case CommandType::Climb: {
            const double dz = command.altitude - uav.z;
            uav.z += std::clamp(dz, 0.0, v_step);
            break;
        }
        case CommandType::CommitLand:
            uav.z = std::max(0.0, uav.z - v_step);
            break;
    }

    world.advance_clock(dt);
}

ClassImage render_view(const World& world, const RigidPose& pose, const CameraModel& cam) {
    cam.validate();
    if (std::abs(pose.optical_axis_world().z()) < 1e-6 || pose.camera_center().z() <= 0.1) {
        throw DegeneratePose("render requires a valid aerial pose");
    }

    const Eigen::Matrix3d r_t = pose.rotation().transpose();
    const Eigen::Vector3d center = pose.camera_center();
    ClassImage image(cam.width, cam.height, ClassId::Background);

    const auto& agents = world.agents();
    for (int v = 0; v < cam.height; ++v) {
        for (int u = 0; u < cam.width; ++u) {
            const Eigen::Vector3d dir_cam((u + 0.5 - cam.cx) / cam.fx,
                                          (v + 0.5 - cam.cy) / cam.fy, 1.0);
            const Eigen::Vector3d dir = r_t * dir_cam;
            if (std::abs(dir.z()) < 1e-12) continue; // stays Background
            const double s = -center.z() / dir.z();
            if (s <= 0.0) continue;
            const GroundPoint g{center.x() + s * dir.x(), center.y() + s * dir.y()};
            ClassId cls = world.terrain().class_at_world(g);
            for (const ObstacleAgent& agent : agents) {
                const double dx = g.x - agent.position.x;
                const double dy = g.y - agent.position.y;
                if (dx * dx + dy * dy <= agent.footprint_radius * agent.footprint_radius) {
                    cls = agent.kind;
                }
            }
            image.set(u, v, cls);
        }
    }
    return image;
}

bool obstacle_in_radius(const World& world, const GroundPoint& center, double radius) {
    for (const ObstacleAgent& agent : world.agents()) {
        const double d = std::hypot(agent.position.x - center.x, agent.position.y - center.y);
        if (d <= radius + agent.footprint_radius) return true;
    }
    return false;
}

} // namespace landsim
