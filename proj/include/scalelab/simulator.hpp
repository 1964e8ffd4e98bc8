#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <vector>

#include "scalelab/action.hpp"
#include "scalelab/rng.hpp"
#include "scalelab/token_bucket.hpp"
#include "scalelab/types.hpp"
#include "scalelab/workload.hpp"

namespace scalelab {

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest sample.
// Throws std::invalid_argument on an empty window or p outside (0, 100].
double sample_percentile(std::vector<double> samples, double p);

struct SimulatorConfig {
    std::vector<StageSpec> stages;
    std::vector<ResourceConfig> initial;
    WorkloadPattern workload;
    double tick_s = 0.1;
    std::uint64_t seed = 0;  // 0 = take workload.seed
    double bucket_t_max = 1000.0;
    double bucket_window_ms = 10.0;
};

// Tandem-queue pipeline simulator. Arrivals are generated per 100 ms tick;
// within a tick, service completions, replica activations, and throttle
// refills are processed as exact-time events, so queueing behavior is not
// discretized. Copying a Simulator yields an identical continuation (shared
// random draws until the copies' inputs diverge), which oracle rollouts rely
// on; per-request storage is recycled to keep copies cheap.
class Simulator {
public:
    explicit Simulator(SimulatorConfig cfg);

    // Advance the wall clock by dt seconds.
    void step(double dt_s);

    // Start a fresh measurement window at the current instant.
    void begin_window();

    // Windowed metrics since begin_window(). Percentile fields are 0 when the
    // window saw no completions; callers detect that via stage counts.
    PipelineState snapshot() const;

    // Apply an on-grid action to the live allocation. New replicas serve
    // after startup_delay_s; removals take effect immediately (draining
    // replicas finish their current request). Rate changes reach the
    // throttle at its next window boundary.
    void apply(const ScalingAction& action);

    const std::vector<ResourceConfig>& resources() const { return resources_; }
    const std::vector<StageSpec>& specs() const { return cfg_.stages; }
    double now_s() const { return now_s_; }
    double window_start_s() const { return window_start_s_; }

    // Whole-run conservation counters (pipeline-level).
    std::uint64_t total_arrivals() const { return total_arrivals_; }
    std::uint64_t total_completions() const { return total_completions_; }
    std::uint64_t total_drops() const { return total_drops_; }
    std::uint64_t in_flight() const { return in_flight_; }

    // End-to-end latencies completed in the current window, ms.
    const std::vector<double>& window_latency_samples() const { return win_e2e_ms_; }

    // Whole-run mean queueing delay at one stage (completed requests only).
    double run_mean_queue_delay_s(std::size_t stage) const;
    std::uint64_t run_stage_completions(std::size_t stage) const;

    const TokenBucket* bucket(std::size_t stage) const;

private:
    enum class EventKind { Arrival, Complete, ReplicaReady, Refill };

    struct Event {
        double t = 0.0;
        std::uint64_t seq = 0;
        EventKind kind = EventKind::Arrival;
        std::uint32_t stage = 0;
        std::uint32_t req = 0;
    };
    struct EventAfter {
        bool operator()(const Event& a, const Event& b) const {
            if (a.t != b.t) return a.t > b.t;
            return a.seq > b.seq;
        }
    };

    struct Request {
        double arrival_s = 0.0;        // entered the pipeline
        double stage_arrival_s = 0.0;  // entered the current stage
        double queue_delay_s = 0.0;    // current stage: replica wait + token wait
        double service_s = 0.0;        // current stage: drawn service time
    };

    struct StageRuntime {
        int active = 1;    // replicas serving traffic
        int pending = 0;   // provisioning, not yet ready
        int cancel = 0;    // pending activations to swallow
        int busy = 0;      // replicas holding a request (incl. token-blocked)
        int exec = 0;      // replicas actually executing (GPU: excludes blocked)
        int rate_tenths = 10;
        std::deque<std::uint32_t> waiting;
        std::optional<TokenBucket> bucket;
        bool refill_scheduled = false;
        // windowed integrals and samples
        double busy_time = 0.0;
        double exec_time = 0.0;
        double cap_time = 0.0;
        double queue_time = 0.0;
        double last_accum_s = 0.0;
        std::uint64_t win_arrivals = 0, win_completions = 0, win_drops = 0;
        std::vector<double> win_proc_ms, win_qdelay_ms;
        // whole-run accumulators
        std::uint64_t cum_completions = 0;
        double cum_qdelay_s = 0.0;
    };

    void push_event(double t, EventKind kind, std::uint32_t stage, std::uint32_t req);
    void generate_ticks_until(double end_s);
    void process(const Event& ev);
    void arrive(std::uint32_t stage, std::uint32_t req, double t);
    void dispatch(std::uint32_t stage, double t);
    void start_exec(std::uint32_t stage, std::uint32_t req, double t);
    void complete(std::uint32_t stage, std::uint32_t req, double t);
    void accum(StageRuntime& st, double t);
    std::uint32_t alloc_request();
    void free_request(std::uint32_t id);

    SimulatorConfig cfg_;
    std::vector<ResourceConfig> resources_;
    std::vector<StageRuntime> stages_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
    std::vector<Request> pool_;
    std::vector<std::uint32_t> free_ids_;
    Rng rng_;
    double now_s_ = 0.0;
    std::uint64_t tick_index_ = 0;  // arrivals generated for ticks < this
    double window_start_s_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t total_arrivals_ = 0, total_completions_ = 0, total_drops_ = 0;
    std::uint64_t in_flight_ = 0;
    std::vector<double> win_e2e_ms_;
};

}  // namespace scalelab
