// Command-line front end: single runs, controller/seed sweeps, bottleneck
// evaluation, and log replay. All heavy lifting lives in the library.

#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include "CLI11.hpp"
#include "scalelab/harness.hpp"

namespace {

using namespace scalelab;

void print_summary(const RunSummary& s) {
    std::printf("%-28s %-10s seed=%-6llu p99=%8.1fms mean=%7.1fms thr=%6.2f/s "
                "cost=$%.4f ($%.4f/1k) reward=%+.2f events=%d\n",
                s.scenario.c_str(), s.controller.c_str(),
                static_cast<unsigned long long>(s.seed), s.p99_ms, s.mean_ms,
                s.mean_throughput_rps, s.cost_effective_usd, s.cost_per_1k_requests,
                s.reward_total, s.scaling_events);
    if (s.oracle_enabled)
        std::printf("  regret: measured=%.3f bound=%.3f holds=%s xi=%.3f eta=%.3f\n",
                    s.regret_measured, s.regret_bound, s.regret_bound_holds ? "yes" : "no",
                    s.xi_sum, s.eta_sum);
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            const std::string& controller, std::uint64_t seed, int rounds, bool oracle) {
    Scenario sc = load_scenario(scenario_path);
    if (!controller.empty()) sc.controller = controller;
    if (seed) sc.seed = seed;
    if (rounds > 0) sc.rounds = rounds;
    if (oracle) sc.oracle = true;
    validate_scenario(sc);
    check_writable(out_dir);
    RunResult res = run_experiment(sc);
    print_summary(res.summary);
    for (const std::string& f : export_run(res, out_dir)) std::printf("  wrote %s\n", f.c_str());
    return 0;
}

int cmd_sweep(const std::string& scenario_path, const std::string& out_dir,
              std::vector<std::string> controllers, std::vector<std::uint64_t> seeds,
              int threads) {
    Scenario base = load_scenario(scenario_path);
    if (controllers.empty()) controllers = {"icrl-mock", "static", "hpa_cpu", "threshold", "vpa"};
    if (seeds.empty()) seeds = {base.seed};
    check_writable(out_dir);

    struct Cell {
        Scenario sc;
        RunResult res;
    };
    std::vector<Cell> grid;
    for (const std::string& c : controllers) {
        for (std::uint64_t s : seeds) {
            Scenario sc = base;
            sc.controller = c;
            sc.seed = s;
            sc.name = base.name + "-" + c + "-s" + std::to_string(s);
            validate_scenario(sc);
            grid.push_back({std::move(sc), {}});
        }
    }
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1))
            grid[i].res = run_experiment(grid[i].sc);
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < threads; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<RunSummary> summaries;
    nlohmann::json all = nlohmann::json::array();
    for (Cell& cell : grid) {
        print_summary(cell.res.summary);
        export_run(cell.res, out_dir);
        summaries.push_back(cell.res.summary);
        all.push_back(cell.res.summary.to_json());
    }
    for (const std::string& f : export_comparison(summaries, out_dir))
        std::printf("  wrote %s\n", f.c_str());
    std::ofstream((out_dir + "/sweep_summary.json")) << all.dump(2) << '\n';
    std::printf("  wrote %s/sweep_summary.json\n", out_dir.c_str());
    return 0;
}

int cmd_eval_bottleneck(const std::string& out_dir, int per_class,
                        std::vector<int> probe_counts, std::uint64_t seed, int threads) {
    if (probe_counts.empty()) probe_counts = {4, 16, 64};
    if (!out_dir.empty()) check_writable(out_dir);
    auto suite = make_detection_suite(per_class, seed);
    nlohmann::json all = nlohmann::json::array();
    for (int m : probe_counts) {
        DetectionReport rep = evaluate_bottleneck_detection(suite, m, threads);
        std::printf("%s\n", rep.to_text().c_str());
        all.push_back(rep.to_json());
        if (!out_dir.empty()) {
            std::ofstream(out_dir + "/bottleneck_m" + std::to_string(m) + ".txt")
                << rep.to_text();
        }
    }
    if (!out_dir.empty()) {
        std::ofstream(out_dir + "/bottleneck_reports.json") << all.dump(2) << '\n';
        std::printf("  wrote %s/bottleneck_reports.json\n", out_dir.c_str());
    }
    return 0;
}

// Re-score a persisted log against the same reward config: every row carries
// its own before/after measurements, so the rewards must reproduce (modulo
// frontier rows skipped as unmeasured, recognizable by the guard value).
int cmd_replay(const std::string& log_path, const std::string& scenario_path,
               const std::string& out_dir) {
    Scenario sc = load_scenario(scenario_path);
    EpisodeLog log = EpisodeLog::from_csv(log_path);
    ParetoFrontier frontier(sc.frontier_l_max_ms, sc.frontier_c_max);
    double max_diff = 0.0, total = 0.0;
    for (const EpisodeRecord& r : log.records) {
        RewardInputs in;
        in.l_before_ms = r.l_before_ms;
        in.l_after_ms = r.l_after_ms;
        in.c_before = r.c_before;
        in.c_after = r.c_after;
        RewardBreakdown rb = compute_reward(in, r.action, frontier, sc.reward);
        bool guarded = r.l_after_ms == std::max(r.l_before_ms, 2.0 * sc.reward.t_sla_ms);
        if (!guarded) frontier.update(r.l_after_ms, r.c_after);
        max_diff = std::max(max_diff, std::fabs(rb.total - r.reward.total));
        total += rb.total;
    }
    std::printf("replayed %zu rounds: reward total %+.3f, max per-round deviation %.3g\n",
                log.records.size(), total, max_diff);
    if (!out_dir.empty()) {
        check_writable(out_dir);
        nlohmann::json j{{"rounds", log.records.size()},
                         {"reward_total", total},
                         {"max_round_deviation", max_diff}};
        std::ofstream(out_dir + "/replay_summary.json") << j.dump(2) << '\n';
        std::printf("  wrote %s/replay_summary.json\n", out_dir.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator-backed autoscaling lab for multi-stage inference pipelines"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = "out", eval_out, replay_out, controller, log_path;
    std::uint64_t seed = 0;
    int rounds = 0, threads = 0, per_class = 50;
    std::uint64_t suite_seed = 2026;
    bool oracle = false;
    std::vector<std::string> controllers;
    std::vector<std::uint64_t> seeds;
    std::vector<int> probe_counts;

    auto* run = app.add_subcommand("run", "Execute one scenario and export its artifacts");
    run->add_option("--scenario", scenario_path, "scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--controller", controller, "override the scenario's controller");
    run->add_option("--seed", seed, "override the scenario's seed");
    run->add_option("--rounds", rounds, "override the scenario's round count");
    run->add_flag("--oracle", oracle, "enable hindsight-best regret accounting");

    auto* sweep = app.add_subcommand("sweep", "Run a controllers x seeds grid of one scenario");
    sweep->add_option("--scenario", scenario_path, "scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--controllers", controllers, "controllers to compare")->delimiter(',');
    sweep->add_option("--seeds", seeds, "seed list")->delimiter(',');
    sweep->add_option("--threads", threads, "worker threads (default: hardware)");

    auto* evalb = app.add_subcommand("eval-bottleneck",
                                     "Score bottleneck identification on a labeled suite");
    evalb->add_option("--out", eval_out, "output directory (empty: stdout only)");
    evalb->add_option("--per-class", per_class, "scenarios per class");
    evalb->add_option("--probes", probe_counts, "probe counts per stage")->delimiter(',');
    evalb->add_option("--seed", suite_seed, "suite generation seed");
    evalb->add_option("--threads", threads, "worker threads (default: hardware)");

    auto* replay = app.add_subcommand("replay", "Re-score a persisted run log");
    replay->add_option("--log", log_path, "episode log CSV")->required()->check(CLI::ExistingFile);
    replay->add_option("--scenario", scenario_path, "scenario JSON the log came from")
        ->required()
        ->check(CLI::ExistingFile);
    replay->add_option("--out", replay_out, "output directory (empty: stdout only)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(run))
            return cmd_run(scenario_path, out_dir, controller, seed, rounds, oracle);
        if (app.got_subcommand(sweep))
            return cmd_sweep(scenario_path, out_dir, controllers, seeds, threads);
        if (app.got_subcommand(evalb))
            return cmd_eval_bottleneck(eval_out, per_class, probe_counts, suite_seed, threads);
        if (app.got_subcommand(replay)) return cmd_replay(log_path, scenario_path, replay_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
