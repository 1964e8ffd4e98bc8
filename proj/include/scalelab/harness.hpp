#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "scalelab/cost.hpp"
#include "scalelab/episode_log.hpp"
#include "scalelab/pareto.hpp"
#include "scalelab/policy.hpp"
#include "scalelab/scenario.hpp"

namespace scalelab {

// Per-run aggregates, serializable for reports and cross-run comparisons.
struct RunSummary {
    std::string scenario;
    std::string controller;
    std::uint64_t seed = 0;
    int rounds = 0;
    double p99_ms = 0.0;   // across every measurement window's samples
    double mean_ms = 0.0;
    double mean_throughput_rps = 0.0;
    std::uint64_t requests_completed = 0;
    double cost_billable_usd = 0.0;   // whole run, warmup included
    double cost_effective_usd = 0.0;
    double cost_per_1k_requests = 0.0;  // effective
    double reward_total = 0.0;
    double reward_latency = 0.0, reward_cost = 0.0, reward_sla = 0.0;
    double reward_proactive = 0.0, reward_pareto = 0.0;
    int scaling_events = 0;  // rounds whose executed action touched anything
    int probe_rounds = 0;
    int backend_failures = 0;
    std::vector<int> scale_ups_by_stage;  // replica increases, per stage
    double final_epsilon = 0.0;
    double frontier_hypervolume = 0.0;
    // regret accounting, populated when the oracle ran
    bool oracle_enabled = false;
    double regret_measured = 0.0;
    double regret_bound = 0.0;
    bool regret_bound_holds = true;
    double xi_sum = 0.0, eta_sum = 0.0, epsilon_sum = 0.0;
    bool oracle_restricted = false;  // enumeration ever hit the budget cap

    nlohmann::json to_json() const;
};

struct RunResult {
    EpisodeLog log;
    RunSummary summary;
};

// When the measurement window completed nothing, the observed p99 is
// undefined; score it as at least twice the SLA so starving the pipeline
// never looks like winning.
double guarded_p99(const PipelineState& after, double l_before_ms, double t_sla_ms);

struct OracleConfig {
    double settle_s = 20.0;
    double measure_s = 10.0;
    std::size_t max_candidates = 64;
};

struct OracleOutcome {
    ScalingAction best;
    double best_reward = 0.0;
    double executed_reward = 0.0;       // same clone machinery, same seed path
    double best_retrieved_reward = 0.0; // over validated retrieved actions + no-op
    bool restricted = false;
};

// Hindsight best action: every candidate (no-op, the executed action, each
// single-knob grid move, each distinct validated retrieved action) is rolled
// forward on a copy of the simulator under identical random draws, and scored
// with the same reward the run uses. Candidates beyond the budget are dropped
// (retrieved extras first) and the outcome is flagged.
OracleOutcome oracle_best_action(const Simulator& sim, const ScalingAction& executed,
                                 const std::vector<ScalingAction>& retrieved,
                                 const PipelineState& before, double l_before_ms,
                                 double c_before, const ParetoFrontier& frontier,
                                 const RewardConfig& rcfg, const ValidatorConfig& limits,
                                 const CooldownState& cooldowns, const OracleConfig& ocfg);

// Full decision loop for one scenario: warm up, then per round observe,
// retrieve, decide, validate, (optionally score the oracle), actuate, settle,
// measure, reward, store, update the frontier. Baseline controllers run the
// same loop with their own decision rule and no store.
RunResult run_experiment(const Scenario& scenario);

// ---- bottleneck identification -------------------------------------------

struct DetectionScenario {
    Scenario scenario;
    std::string truth;  // preprocessing | inference | postprocessing | multiple
};

struct DetectionReport {
    std::vector<std::string> classes;
    std::vector<std::vector<int>> confusion;  // [truth][predicted]
    std::vector<double> precision, recall, f1;
    double accuracy = 0.0;
    int probes_per_stage = 0;
    int scenarios = 0;

    std::string to_text() const;
    nlohmann::json to_json() const;
};

// Probe-vote identification: each cycle clones the pipeline, grants every
// stage one extra replica in isolation, and votes for the stage whose grant
// raised steady throughput the most. Plurality wins; a runner-up within 20%
// of the winner reads as jointly constrained ("multiple").
std::string detect_bottleneck(const Scenario& sc, int probes_per_stage);

// Synthetic labeled suite: three-stage cpu/gpu/cpu pipelines where the
// constrained stage(s) get a fraction of the offered load as per-replica
// capacity and the rest get comfortable headroom.
std::vector<DetectionScenario> make_detection_suite(int per_class, std::uint64_t seed);

// Runs detection over the suite (in parallel) and tabulates the 4-class
// confusion matrix with per-class precision/recall/F1.
DetectionReport evaluate_bottleneck_detection(const std::vector<DetectionScenario>& suite,
                                              int probes_per_stage, int threads = 0);

// ---- export ---------------------------------------------------------------

// Fails fast if the directory cannot be created or written.
void check_writable(const std::string& dir);

// Writes <name>_log.csv, <name>_summary.json, and trajectory/component plots.
std::vector<std::string> export_run(const RunResult& result, const std::string& dir);

// Cross-controller comparison bars (p99 and effective cost).
std::vector<std::string> export_comparison(const std::vector<RunSummary>& summaries,
                                           const std::string& dir);

}  // namespace scalelab
