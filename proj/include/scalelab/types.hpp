#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "scalelab/pareto.hpp"

namespace scalelab {

enum class StageKind { Cpu, Gpu };

// Static description of one pipeline stage. Resource-dependent behavior is
// derived from these via cpu_multiplier(); the live allocation lives in
// ResourceConfig.
struct StageSpec {
    std::string name;
    StageKind kind = StageKind::Cpu;
    double base_service_rate = 10.0;  // req/s per replica at reference allocation
    double cpu_sensitivity = 0.5;     // log-slope of the multiplier above reference
    int cpu_ref_millicores = 1000;
    int memory_floor_mb = 512;        // below this, service rate is halved
    std::size_t queue_capacity = 0;   // 0 = unbounded (no drops)
    double startup_delay_s = 15.0;    // delay before a new replica serves traffic
    double gpu_blocks_per_request = 100.0;  // token cost of one request's kernel work
};

// Live per-stage allocation. rate_ratio is the GPU admission quota; CPU
// stages keep it pinned at 1.
struct ResourceConfig {
    int replicas = 1;
    int cpu_millicores = 1000;
    int memory_mb = 1024;
    double rate_ratio = 1.0;

    friend bool operator==(const ResourceConfig&, const ResourceConfig&) = default;
};

// Service-rate multiplier as a function of CPU/memory allocation: linear
// starvation below the reference allocation, logarithmic diminishing returns
// above it, clamped to [0.25, 2]. Memory under the floor halves the result
// outright. This is a declared simulator assumption, not a measured curve.
inline double cpu_multiplier(int cpu_millicores, int memory_mb, const StageSpec& spec) {
    double ratio = static_cast<double>(cpu_millicores) / spec.cpu_ref_millicores;
    double mult = std::min(ratio, 1.0 + spec.cpu_sensitivity * std::log2(ratio));
    mult = std::clamp(mult, 0.25, 2.0);
    if (memory_mb < spec.memory_floor_mb) mult *= 0.5;
    return mult;
}

inline double per_replica_rate(const StageSpec& spec, const ResourceConfig& res) {
    return spec.base_service_rate * cpu_multiplier(res.cpu_millicores, res.memory_mb, spec);
}

enum class WorkloadKind { Poisson, Ramp, Burst };

struct WorkloadPattern {
    WorkloadKind kind = WorkloadKind::Poisson;
    double base_rate = 10.0;       // req/s
    double ramp_slope = 0.0;       // req/s per second
    double burst_amplitude = 1.0;  // rate multiplier inside burst windows
    double burst_period_s = 120.0;
    double burst_duty = 0.25;      // fraction of each period spent bursting
    std::uint64_t seed = 1;
};

// Windowed per-stage observables, reported once per decision interval.
struct StageSnapshot {
    std::string name;
    StageKind kind = StageKind::Cpu;
    ResourceConfig config;
    double queue_depth = 0.0;          // time-averaged requests waiting
    double u_cpu = 0.0;                // replica busy time / capacity
    double u_gpu_quota = 0.0;          // min(1, raw GPU util / rate_ratio); 0 on CPU stages
    double proc_ms_mean = 0.0;
    double proc_ms_p99 = 0.0;
    double queue_delay_ms_mean = 0.0;  // replica wait + token-admission wait
    double queue_delay_ms_p99 = 0.0;
    std::uint64_t arrivals = 0;
    std::uint64_t completions = 0;
    std::uint64_t drops = 0;
};

struct PipelineState {
    std::vector<StageSnapshot> stages;
    double latency_p99_ms = 0.0;  // end-to-end, completed requests in window
    double latency_mean_ms = 0.0;
    double throughput_rps = 0.0;
    double t_s = 0.0;
    std::vector<ObjectivePoint> frontier_snapshot;
};

}  // namespace scalelab
