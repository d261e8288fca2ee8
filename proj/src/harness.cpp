#include "landsim/harness.hpp"

#include "landsim/errors.hpp"
#include "landsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace landsim {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

bool is_intervention(const FlightCommand& cmd) {
    return cmd.type == CommandType::Pause || cmd.type == CommandType::Climb;
}

bool person_agent_in_radius(const World& world, const GroundPoint& center, double radius) {
    for (const ObstacleAgent& agent : world.agents()) {
        if (agent.kind != ClassId::Person) continue;
        const double d = std::hypot(agent.position.x - center.x, agent.position.y - center.y);
        if (d <= radius + agent.footprint_radius) return true;
    }
    return false;
}

} // namespace

Pipeline::Pipeline(const Scenario& scenario)
    : scenario_(scenario),
      classes_(scenario.class_set()),
      map_(scenario.map_cells(), scenario.map_cells(), scenario.map_cell_size, MapFrame{}),
      history_(scenario.spot) {
    scenario_.validate();
}

bool Pipeline::person_latched_near(const GroundPoint& center_world, double radius) const {
    const GroundPoint m = map_.frame().world_to_map(center_world);
    const double cs = map_.cell_size();
    const double half_x = (map_.x_cells() - 1) / 2.0;
    const double half_y = (map_.y_cells() - 1) / 2.0;
    const int x_lo = std::max(0, static_cast<int>(std::floor((m.x - radius) / cs + half_x)));
    const int x_hi = std::min(map_.x_cells() - 1,
                              static_cast<int>(std::ceil((m.x + radius) / cs + half_x)));
    const int y_lo = std::max(0, static_cast<int>(std::floor((m.y - radius) / cs + half_y)));
    const int y_hi = std::min(map_.y_cells() - 1,
                              static_cast<int>(std::ceil((m.y + radius) / cs + half_y)));
    const double r2 = radius * radius;
    for (int iy = y_lo; iy <= y_hi; ++iy) {
        for (int ix = x_lo; ix <= x_hi; ++ix) {
            const GroundPoint c{(ix - half_x) * cs, (iy - half_y) * cs};
            const double dx = c.x - m.x;
            const double dy = c.y - m.y;
            if (dx * dx + dy * dy > r2) continue;
            if (map_.cell(ix, iy)[kPersonIndex] > scenario_.filter.person_latch_threshold) {
                return true;
            }
        }
    }
    return false;
}

Pipeline::Output Pipeline::tick(const SegmentationFrame& frame, const RigidPose& pose,
                                double agl, double dt) {
    integrate_observation(map_, frame, scenario_.camera, prev_pose_, pose, scenario_.filter,
                          tick_);
    prev_pose_ = pose;
    const LabelGrid labels = filtered_argmax(map_);

    Output out;

    // Spot search runs in the first sequence at or above the search altitude.
    if (state_.sequence == Sequence::SpotAvailable &&
        agl >= scenario_.altitude.search_altitude - 1e-9) {
        const SafeMask mask = safe_mask(labels, classes_);
        const std::vector<GridSegment> segs = segments(mask, scenario_.spot);
        std::vector<DistanceField> fields;
        fields.reserve(segs.size());
        for (const GridSegment& seg : segs) {
            fields.push_back(distance_transform(seg, map_.x_cells(), map_.y_cells(),
                                                map_.cell_size()));
        }
        out.candidate = select_spot(fields, map_, classes_, scenario_.spot, tick_, &history_);
    }

    auto validator = [this, &labels](const LandingSpot& spot) {
        return validate_spot(map_, labels, spot, classes_, scenario_.spot, scenario_.filter);
    };

    // Re-validate the active target while above the minimum-radius altitude.
    if (state_.sequence == Sequence::TowardSpot && state_.target &&
        agl > scenario_.altitude.min_radius_altitude) {
        out.validation = validator(*state_.target);
    }

    // Below it, only dynamic objects: person evidence inside the footprint.
    bool dynamic_object = false;
    if (agl <= scenario_.altitude.min_radius_altitude) {
        try {
            const auto corners = ground_footprint(scenario_.camera, pose);
            double r_max = 0.0;
            GroundPoint center{0.0, 0.0};
            for (const auto& c : corners) {
                center.x += c.x / 4.0;
                center.y += c.y / 4.0;
            }
            for (const auto& c : corners) {
                r_max = std::max(r_max, std::hypot(c.x - center.x, c.y - center.y));
            }
            dynamic_object = person_latched_near(center, r_max);
        } catch (const DegeneratePose&) {
            dynamic_object = false;
        }
    }
    out.dynamic_object = dynamic_object;

    const Eigen::Vector3d cam_center = pose.camera_center();
    BtInputs inputs;
    inputs.agl = agl;
    inputs.dt = dt;
    inputs.position = {cam_center.x(), cam_center.y()};
    inputs.heading = MapFrame::from_pose(pose).heading;
    inputs.candidate = out.candidate;
    inputs.target_validation = out.validation;
    inputs.dynamic_object = dynamic_object;
    inputs.history = &history_;
    inputs.classes = &classes_;
    inputs.validate = validator;

    out.command = bt_tick(state_, inputs, scenario_.altitude);
    out.sequence = state_.sequence;
    out.target = state_.target;
    ++tick_;
    return out;
}

const char* to_string(TrialResult::Outcome outcome) {
    switch (outcome) {
        case TrialResult::Outcome::LandedSafe: return "LandedSafe";
        case TrialResult::Outcome::LandedUnsafe: return "LandedUnsafe";
        case TrialResult::Outcome::TimedOut: return "TimedOut";
        case TrialResult::Outcome::Aborted: return "Aborted";
    }
    return "?";
}

TraceWriter::TraceWriter(std::ostream& out) : out_(out) {
    out_ << "tick,t_s,agl_m,sequence,command,validation,target_x,target_y,dynamic_object\n";
}

void TraceWriter::row(int tick, double t, double agl, const Pipeline::Output& out) {
    out_ << tick << "," << fmt(t) << "," << fmt(agl) << "," << to_string(out.sequence) << ","
         << describe(out.command) << ","
         << (out.validation ? to_string(out.validation->reason) : "n/a") << ","
         << (out.target ? fmt(out.target->world.x) : "") << ","
         << (out.target ? fmt(out.target->world.y) : "") << ","
         << (out.dynamic_object ? 1 : 0) << "\n";
}

TrialResult run_trial(const Scenario& scenario, std::uint64_t seed, int trial_index,
                      TraceWriter* trace) {
    scenario.validate();

    TrialResult result;
    result.trial_index = trial_index;
    result.seed = seed;

    World world = scenario.make_world(seed);
    UAVState uav;
    uav.x = scenario.start_x;
    uav.y = scenario.start_y;
    uav.z = scenario.start_altitude;
    uav.heading = scenario.start_heading;
    uav.h_speed_limit = scenario.h_speed;
    uav.v_speed_limit = scenario.v_speed;

    Pipeline pipeline(scenario);
    Rng noise_rng(Rng::mix(seed, Rng::mix(scenario.noise.seed, 0x5e6)));

    const double dt = 1.0 / scenario.tick_rate;
    const int max_ticks = static_cast<int>(std::ceil(scenario.duration_cap / dt));

    bool incursion_open = false;
    bool incursion_prev = false;
    double incursion_t0 = 0.0;
    std::optional<GroundPoint> prev_target;
    bool prev_pause = false;

    try {
        for (int tick = 0; tick < max_ticks; ++tick) {
            const RigidPose pose = RigidPose::nadir(uav.position(), uav.heading);
            const ClassImage view = render_view(world, pose, scenario.camera);
            const SegmentationFrame frame = segment(view, scenario.noise, noise_rng, tick);

            const Pipeline::Output out = pipeline.tick(frame, pose, uav.z, dt);
            if (trace != nullptr) trace->row(tick, world.clock(), uav.z, out);

            // ---- metrics (ground truth; commands for this tick are fixed)
            if (out.command.type == CommandType::Pause && !prev_pause) ++result.pause_count;
            prev_pause = out.command.type == CommandType::Pause;

            if (out.target && prev_target) {
                const double moved = std::hypot(out.target->world.x - prev_target->x,
                                                out.target->world.y - prev_target->y);
                if (moved > 0.5) ++result.reroute_count;
            }
            if (out.target) {
                prev_target = out.target->world;
            }

            if (out.target) {
                const bool gt_in_zone =
                    obstacle_in_radius(world, out.target->world, scenario.spot.r_safe);
                const bool person_in_zone =
                    person_agent_in_radius(world, out.target->world, scenario.spot.r_safe);
                if (person_in_zone &&
                    !pipeline.person_latched_near(out.target->world, scenario.spot.r_safe)) {
                    ++result.undetected_person_ticks;
                }
                if (gt_in_zone && !incursion_prev && !incursion_open &&
                    out.sequence == Sequence::TowardSpot) {
                    incursion_open = true;
                    incursion_t0 = world.clock();
                }
                if (incursion_open && is_intervention(out.command)) {
                    result.latency_samples.push_back({incursion_t0, world.clock()});
                    incursion_open = false;
                }
                if (incursion_open && (!gt_in_zone || out.sequence == Sequence::Landing ||
                                       out.sequence == Sequence::Landed)) {
                    incursion_open = false; // episode ended without intervention
                }
                incursion_prev = gt_in_zone;
            } else {
                incursion_prev = false;
                incursion_open = false;
            }

            if (out.sequence == Sequence::Landed) {
                result.touchdown = uav.ground_position();
                result.touchdown_class = world.terrain().class_at_world(result.touchdown);
                result.ticks = tick + 1;
                result.sim_seconds = world.clock();

                // Safety audit against ground truth.
                bool unsafe_terrain = false;
                const TerrainGrid& terrain = world.terrain();
                const ClassSet classes = scenario.class_set();
                const double r = scenario.spot.r_safe;
                const int x_lo = static_cast<int>(
                    std::floor((result.touchdown.x - r + terrain.extent_x() / 2) /
                               terrain.resolution()));
                const int x_hi = static_cast<int>(
                    std::ceil((result.touchdown.x + r + terrain.extent_x() / 2) /
                              terrain.resolution()));
                const int y_lo = static_cast<int>(
                    std::floor((result.touchdown.y - r + terrain.extent_y() / 2) /
                               terrain.resolution()));
                const int y_hi = static_cast<int>(
                    std::ceil((result.touchdown.y + r + terrain.extent_y() / 2) /
                              terrain.resolution()));
                for (int iy = y_lo; iy <= y_hi && !unsafe_terrain; ++iy) {
                    for (int ix = x_lo; ix <= x_hi; ++ix) {
                        GroundPoint c;
                        bool safe_cell;
                        if (ix < 0 || ix >= terrain.x_cells() || iy < 0 ||
                            iy >= terrain.y_cells()) {
                            c = {-terrain.extent_x() / 2 + (ix + 0.5) * terrain.resolution(),
                                 -terrain.extent_y() / 2 + (iy + 0.5) * terrain.resolution()};
                            safe_cell = false; // beyond the mapped world
                        } else {
                            c = terrain.cell_center_world(ix, iy);
                            safe_cell = classes.is_safe(terrain.at(ix, iy));
                        }
                        const double dx = c.x - result.touchdown.x;
                        const double dy = c.y - result.touchdown.y;
                        if (dx * dx + dy * dy >= r * r) continue;
                        if (!safe_cell) {
                            unsafe_terrain = true;
                            break;
                        }
                    }
                }
                const bool agent_in_zone = obstacle_in_radius(world, result.touchdown, r);
                const bool person_at_touchdown =
                    person_agent_in_radius(world, result.touchdown, r);
                result.fn_human_at_touchdown =
                    person_at_touchdown &&
                    !pipeline.person_latched_near(result.touchdown, r);
                result.outcome = (unsafe_terrain || agent_in_zone)
                                     ? TrialResult::Outcome::LandedUnsafe
                                     : TrialResult::Outcome::LandedSafe;
                return result;
            }
            if (out.sequence == Sequence::Aborted) {
                result.ticks = tick + 1;
                result.sim_seconds = world.clock();
                result.outcome = TrialResult::Outcome::Aborted;
                result.abort_reason = "controller abort";
                return result;
            }

            // Scripted incursions may react to the active spot.
            world.set_pipeline_observables(
                out.target ? std::optional<GroundPoint>(out.target->world) : std::nullopt,
                uav.z);
            step(world, uav, out.command, dt);
        }
    } catch (const std::exception& e) {
        result.outcome = TrialResult::Outcome::Aborted;
        result.abort_reason = e.what();
        result.sim_seconds = world.clock();
        return result;
    }

    result.outcome = TrialResult::Outcome::TimedOut;
    result.ticks = max_ticks;
    result.sim_seconds = world.clock();
    return result;
}

BatchSummary summarize(const std::vector<TrialResult>& results) {
    BatchSummary s;
    s.trials = static_cast<int>(results.size());
    std::vector<double> latencies;
    for (const TrialResult& r : results) {
        switch (r.outcome) {
            case TrialResult::Outcome::LandedSafe: ++s.landed_safe; break;
            case TrialResult::Outcome::LandedUnsafe: ++s.landed_unsafe; break;
            case TrialResult::Outcome::TimedOut: ++s.timed_out; break;
            case TrialResult::Outcome::Aborted: ++s.aborted; break;
        }
        if (r.fn_human_at_touchdown) ++s.fn_human_touchdown_total;
        s.reroutes_total += r.reroute_count;
        s.pauses_total += r.pause_count;
        for (const LatencySample& l : r.latency_samples) latencies.push_back(l.latency());
    }
    s.success_rate = s.trials > 0 ? static_cast<double>(s.landed_safe) / s.trials : 0.0;
    s.latency_sample_count = static_cast<int>(latencies.size());
    if (!latencies.empty()) {
        std::sort(latencies.begin(), latencies.end());
        double sum = 0.0;
        for (double v : latencies) sum += v;
        s.latency_mean = sum / latencies.size();
        auto rank = [&](double p) {
            const std::size_t idx = static_cast<std::size_t>(
                std::ceil(p * latencies.size()));
            return latencies[std::min(latencies.size() - 1, std::max<std::size_t>(idx, 1) - 1)];
        };
        s.latency_median = rank(0.5);
        s.latency_p95 = rank(0.95);
    }
    return s;
}

std::vector<TrialResult> run_batch(const Scenario& scenario, int trials,
                                   std::uint64_t seed_base, int jobs,
                                   const std::string& out_dir) {
    if (trials <= 0) throw InvalidParams("trial count must be positive");
    jobs = std::max(1, jobs);

    std::vector<TrialResult> results(trials);
    std::mutex next_mutex;
    int next_index = 0;

    auto worker = [&]() {
        while (true) {
            int index;
            {
                std::lock_guard<std::mutex> lock(next_mutex);
                if (next_index >= trials) return;
                index = next_index++;
            }
            results[index] = run_trial(scenario, seed_base + static_cast<std::uint64_t>(index),
                                       index, nullptr);
        }
    };

    std::vector<std::thread> pool;
    for (int i = 0; i < std::min(jobs, trials); ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        {
            std::ofstream out(out_dir + "/trials.csv");
            write_trials_csv(results, out);
        }
        {
            std::ofstream out(out_dir + "/latencies.csv");
            write_latencies_csv(results, out);
        }
        {
            std::ofstream out(out_dir + "/summary.csv");
            write_summary_csv(summarize(results), out);
        }
    }
    return results;
}

void write_trials_csv(const std::vector<TrialResult>& results, std::ostream& out) {
    out << "trial,seed,outcome,touch_x,touch_y,touch_class,ticks,sim_seconds,reroutes,pauses,"
           "latency_count,latency_mean_s,undetected_person_ticks,fn_human_touchdown,"
           "abort_reason\n";
    for (const TrialResult& r : results) {
        double mean = 0.0;
        for (const LatencySample& l : r.latency_samples) mean += l.latency();
        if (!r.latency_samples.empty()) mean /= r.latency_samples.size();
        out << r.trial_index << "," << r.seed << "," << to_string(r.outcome) << ","
            << fmt(r.touchdown.x) << "," << fmt(r.touchdown.y) << ","
            << class_name(r.touchdown_class) << "," << r.ticks << "," << fmt(r.sim_seconds)
            << "," << r.reroute_count << "," << r.pause_count << ","
            << r.latency_samples.size() << "," << fmt(mean) << ","
            << r.undetected_person_ticks << "," << (r.fn_human_at_touchdown ? 1 : 0) << ","
            << r.abort_reason << "\n";
    }
}

void write_latencies_csv(const std::vector<TrialResult>& results, std::ostream& out) {
    out << "trial,incursion_s,intervention_s,latency_s\n";
    for (const TrialResult& r : results) {
        for (const LatencySample& l : r.latency_samples) {
            out << r.trial_index << "," << fmt(l.incursion_time) << ","
                << fmt(l.intervention_time) << "," << fmt(l.latency()) << "\n";
        }
    }
}

void write_summary_csv(const BatchSummary& s, std::ostream& out) {
    out << "trials,landed_safe,landed_unsafe,timed_out,aborted,success_rate,"
           "fn_human_touchdown_total,latency_samples,latency_mean_s,latency_median_s,"
           "latency_p95_s,reroutes_total,pauses_total\n";
    out << s.trials << "," << s.landed_safe << "," << s.landed_unsafe << "," << s.timed_out
        << "," << s.aborted << "," << fmt(s.success_rate) << "," << s.fn_human_touchdown_total
        << "," << s.latency_sample_count << "," << fmt(s.latency_mean) << ","
        << fmt(s.latency_median) << "," << fmt(s.latency_p95) << "," << s.reroutes_total << ","
        << s.pauses_total << "\n";
}

LatencyReport digitize_latency_report(const std::vector<double>& samples) {
    if (samples.empty()) throw EmptyInput("no latency samples");
    LatencyReport report;
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());

    const int max_bin = static_cast<int>(std::floor(sorted.back() / report.bin_width));
    report.bin_counts.assign(max_bin + 1, 0);
    for (double v : sorted) {
        const int bin = std::min(max_bin, static_cast<int>(std::floor(v / report.bin_width)));
        ++report.bin_counts[bin];
    }
    auto rank = [&](double p) {
        const std::size_t idx = static_cast<std::size_t>(std::ceil(p * sorted.size()));
        return sorted[std::min(sorted.size() - 1, std::max<std::size_t>(idx, 1) - 1)];
    };
    report.p50 = rank(0.5);
    report.p90 = rank(0.9);
    report.p99 = rank(0.99);
    return report;
}

void write_latency_report_csv(const LatencyReport& report, std::ostream& out) {
    out << "kind,key,value\n";
    for (std::size_t i = 0; i < report.bin_counts.size(); ++i) {
        out << "histogram," << fmt(i * report.bin_width) << "," << report.bin_counts[i] << "\n";
    }
    out << "percentile,p50," << fmt(report.p50) << "\n";
    out << "percentile,p90," << fmt(report.p90) << "\n";
    out << "percentile,p99," << fmt(report.p99) << "\n";
}

} // namespace landsim
