#pragma once

#include <array>
#include <cstdlib>
#include <string>
#include <vector>

namespace scalelab {

// Discrete per-stage scaling grid. Rate-ratio deltas are kept in integer
// tenths so repeated adjustments never accumulate float error.
inline constexpr std::array<int, 4> kReplicaDeltas{-1, 0, 1, 2};
inline constexpr std::array<int, 3> kCpuDeltas{-500, 0, 500};
inline constexpr std::array<int, 3> kMemDeltas{-256, 0, 256};
inline constexpr std::array<int, 4> kRateTenthDeltas{-1, 0, 1, 2};

inline constexpr int kCpuStepMillicores = 500;
inline constexpr int kMemStepMb = 256;

// One stage's on-grid resource delta. CPU stages use replicas/cpu/memory;
// GPU stages use replicas/rate tenths. Off-kind fields stay 0.
struct StageDelta {
    int replicas = 0;
    int cpu_millicores = 0;
    int memory_mb = 0;
    int rate_ratio_tenths = 0;

    bool is_noop() const {
        return replicas == 0 && cpu_millicores == 0 && memory_mb == 0 &&
               rate_ratio_tenths == 0;
    }
    friend bool operator==(const StageDelta&, const StageDelta&) = default;
};

struct ScalingAction {
    std::vector<StageDelta> stages;

    bool is_noop() const {
        for (const auto& s : stages)
            if (!s.is_noop()) return false;
        return true;
    }
    // Count of stages this action touches.
    int stages_scaled() const {
        int n = 0;
        for (const auto& s : stages) n += s.is_noop() ? 0 : 1;
        return n;
    }
    friend bool operator==(const ScalingAction&, const ScalingAction&) = default;

    static ScalingAction noop(std::size_t n_stages) {
        ScalingAction a;
        a.stages.resize(n_stages);
        return a;
    }
};

// Requested (possibly off-grid) deltas, e.g. parsed from a policy response
// before validation snaps them onto the grid.
struct RawStageDelta {
    double replicas = 0.0;
    double cpu_millicores = 0.0;
    double memory_mb = 0.0;
    double rate_ratio = 0.0;
};

struct RawAction {
    std::vector<RawStageDelta> stages;
};

}  // namespace scalelab
