#include "landsim/errors.hpp"
#include "landsim/harness.hpp"
#include "landsim/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

namespace {

int cmd_run(const std::string& scenario_path, std::uint64_t seed, const std::string& out_dir,
            bool trace) {
    const landsim::Scenario scenario = landsim::load_scenario(scenario_path);
    std::filesystem::create_directories(out_dir);

    std::ofstream trace_file;
    std::unique_ptr<landsim::TraceWriter> writer;
    if (trace) {
        trace_file.open(out_dir + "/trace.csv");
        writer = std::make_unique<landsim::TraceWriter>(trace_file);
    }

    const landsim::TrialResult result =
        landsim::run_trial(scenario, seed, 0, writer.get());

    {
        std::ofstream out(out_dir + "/trial.csv");
        landsim::write_trials_csv({result}, out);
    }
    std::cout << "outcome=" << landsim::to_string(result.outcome)
              << " ticks=" << result.ticks << " sim_seconds=" << result.sim_seconds
              << " pauses=" << result.pause_count << " reroutes=" << result.reroute_count
              << "\n";
    return result.outcome == landsim::TrialResult::Outcome::Aborted ? 1 : 0;
}

int cmd_batch(const std::string& scenario_path, int trials, std::uint64_t seed_base, int jobs,
              const std::string& out_dir) {
    const landsim::Scenario scenario = landsim::load_scenario(scenario_path);
    const auto results = landsim::run_batch(scenario, trials, seed_base, jobs, out_dir);
    const landsim::BatchSummary summary = landsim::summarize(results);
    std::cout << "trials=" << summary.trials << " success_rate=" << summary.success_rate
              << " landed_unsafe=" << summary.landed_unsafe << " timed_out=" << summary.timed_out
              << " aborted=" << summary.aborted
              << " latency_p95=" << summary.latency_p95 << "\n";
    // Nonzero when aborts dominate the batch.
    return summary.aborted > summary.trials / 2 ? 2 : 0;
}

int cmd_report(const std::string& in_dir, const std::string& out_file) {
    std::ifstream in(in_dir + "/latencies.csv");
    if (!in) {
        std::cerr << "no latencies.csv under " << in_dir << "\n";
        return 1;
    }
    std::string line;
    std::getline(in, line); // header
    std::vector<double> samples;
    while (std::getline(in, line)) {
        const auto last_comma = line.rfind(',');
        if (last_comma == std::string::npos) continue;
        samples.push_back(std::stod(line.substr(last_comma + 1)));
    }
    try {
        const landsim::LatencyReport report = landsim::digitize_latency_report(samples);
        std::ofstream out(out_file);
        landsim::write_latency_report_csv(report, out);
        std::cout << "samples=" << samples.size() << " p50=" << report.p50
                  << " p90=" << report.p90 << " p99=" << report.p99 << "\n";
    } catch (const landsim::EmptyInput&) {
        std::cerr << "no latency samples in " << in_dir << "\n";
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic closed-loop simulator for semantic-map based safe landing"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "out";
    std::string in_dir;
    std::string out_file = "latency_report.csv";
    std::uint64_t seed = 1;
    int trials = 200;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    bool trace = false;

    CLI::App* run = app.add_subcommand("run", "Run a single trial");
    run->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    run->add_option("--seed", seed, "Trial seed");
    run->add_option("--out", out_dir, "Output directory");
    run->add_flag("--trace", trace, "Write a per-tick trace CSV");

    CLI::App* batch = app.add_subcommand("batch", "Run a seeded batch of trials");
    batch->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    batch->add_option("--trials", trials, "Number of trials");
    batch->add_option("--seed-base", seed, "Base seed; trial i uses seed-base + i");
    batch->add_option("--jobs", jobs, "Worker threads");
    batch->add_option("--out", out_dir, "Output directory");

    CLI::App* report = app.add_subcommand("report", "Latency histogram and percentiles");
    report->add_option("--in", in_dir, "Batch output directory")->required();
    report->add_option("--out", out_file, "Report CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(scenario_path, seed, out_dir, trace);
        if (batch->parsed()) return cmd_batch(scenario_path, trials, seed, jobs, out_dir);
        if (report->parsed()) return cmd_report(in_dir, out_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
