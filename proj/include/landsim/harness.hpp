#pragma once

#include "landsim/landing_bt.hpp"
#include "landsim/scenario.hpp"
#include "landsim/semantic_map.hpp"
#include "landsim/sim.hpp"
#include "landsim/spot_detection.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace landsim {

// Perception and decision stack for one trial. It consumes segmentation
// frames and the UAV pose only; the world never leaks in here, which is
// what keeps ground truth and perception separable in the metrics.
class Pipeline {
public:
    explicit Pipeline(const Scenario& scenario);

    struct Output {
        FlightCommand command;
        Sequence sequence = Sequence::SpotAvailable;
        std::optional<LandingSpot> target;
        std::optional<LandingSpot> candidate;
        std::optional<SpotValidation> validation;
        bool dynamic_object = false;
    };

    Output tick(const SegmentationFrame& frame, const RigidPose& pose, double agl, double dt);

    const SemanticGroundMap& map() const { return map_; }
    const BehaviorState& state() const { return state_; }
    const SpotHistory& history() const { return history_; }
    std::int32_t tick_index() const { return tick_; }

    // True when any cell within `radius` of `center` carries person
    // probability above the latch threshold.
    bool person_latched_near(const GroundPoint& center_world, double radius) const;

private:
    Scenario scenario_;
    ClassSet classes_;
    SemanticGroundMap map_;
    BehaviorState state_;
    SpotHistory history_;
    std::optional<RigidPose> prev_pose_;
    std::int32_t tick_ = 0;
};

struct LatencySample {
    double incursion_time = 0.0;    // ground-truth first intersection, s
    double intervention_time = 0.0; // first intervention command, s
    double latency() const { return intervention_time - incursion_time; }
};

struct TrialResult {
    enum class Outcome { LandedSafe, LandedUnsafe, TimedOut, Aborted };

    int trial_index = 0;
    std::uint64_t seed = 0;
    Outcome outcome = Outcome::TimedOut;
    GroundPoint touchdown{};
    ClassId touchdown_class = ClassId::Background;
    int ticks = 0;
    double sim_seconds = 0.0;
    std::vector<LatencySample> latency_samples;
    int reroute_count = 0;
    int pause_count = 0;
    int undetected_person_ticks = 0;
    bool fn_human_at_touchdown = false;
    std::string abort_reason;
};

const char* to_string(TrialResult::Outcome outcome);

// Per-tick CSV trace: tick,t_s,agl_m,sequence,command,validation,target_x,
// target_y,dynamic_object
class TraceWriter {
public:
    explicit TraceWriter(std::ostream& out);
    void row(int tick, double t, double agl, const Pipeline::Output& out);

private:
    std::ostream& out_;
};

// Runs render -> segment -> filter -> select/validate -> behavior tick ->
// step until touchdown or the duration cap. Metrics are computed from
// ground truth only after each tick's command is fixed.
TrialResult run_trial(const Scenario& scenario, std::uint64_t seed, int trial_index = 0,
                      TraceWriter* trace = nullptr);

struct BatchSummary {
    int trials = 0;
    int landed_safe = 0;
    int landed_unsafe = 0;
    int timed_out = 0;
    int aborted = 0;
    double success_rate = 0.0;
    int fn_human_touchdown_total = 0;
    int latency_sample_count = 0;
    double latency_mean = 0.0;
    double latency_median = 0.0;
    double latency_p95 = 0.0;
    int reroutes_total = 0;
    int pauses_total = 0;
};

BatchSummary summarize(const std::vector<TrialResult>& results);

// Independent seeded trials (seed_base + index) on `jobs` workers. Writes
// trials.csv, latencies.csv and summary.csv into out_dir when given.
// Results come back sorted by trial index; identical inputs give
// byte-identical files.
std::vector<TrialResult> run_batch(const Scenario& scenario, int trials,
                                   std::uint64_t seed_base, int jobs,
                                   const std::string& out_dir = "");

void write_trials_csv(const std::vector<TrialResult>& results, std::ostream& out);
void write_latencies_csv(const std::vector<TrialResult>& results, std::ostream& out);
void write_summary_csv(const BatchSummary& summary, std::ostream& out);

struct LatencyReport {
    double bin_width = 0.1;
    std::vector<int> bin_counts; // bin i: [i*w, (i+1)*w)
    double p50 = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
};

// Fixed 0.1 s bins plus nearest-rank percentiles.
// Throws EmptyInput on no samples.
LatencyReport digitize_latency_report(const std::vector<double>& samples);
void write_latency_report_csv(const LatencyReport& report, std::ostream& out);

} // namespace landsim
