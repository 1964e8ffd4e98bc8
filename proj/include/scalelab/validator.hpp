#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "scalelab/action.hpp"
#include "scalelab/types.hpp"

namespace scalelab {

struct ValidatorConfig {
    int n_min = 1;
    int n_max = 8;
    int cpu_floor_millicores = 100;
    int memory_floor_mb = 64;
    int rate_min_tenths = 1;  // rho >= 0.1
    double cooldown_up_s = 60.0;
    double cooldown_down_s = 120.0;
};

// Per-stage, per-direction replica-change timestamps. Resource and rate
// adjustments are deliberately exempt.
class CooldownState {
public:
    explicit CooldownState(std::size_t n_stages);

    bool up_blocked(std::size_t stage, double now_s, const ValidatorConfig& cfg) const;
    bool down_blocked(std::size_t stage, double now_s, const ValidatorConfig& cfg) const;

    // Record the replica moves of an executed action.
    void note(const ScalingAction& executed, double now_s);

private:
    struct Entry {
        double last_up_s;
        double last_down_s;
    };
    std::vector<Entry> stages_;
};

// Parse a policy proposal (absolute targets keyed by stage name) into raw
// deltas against the current allocation. Forgiving by contract: missing
// stages or fields and wrong types become zero deltas; notes collects a
// human-readable line per ignored field.
RawAction absolute_to_delta(const nlohmann::json& proposal, const PipelineState& current,
                            std::vector<std::string>* notes = nullptr);

// Snap raw deltas onto the per-stage action grid, clamp the resulting
// absolutes to resource bounds, and zero replica moves still in cooldown.
// Total: never fails, output is always a member of the action grid.
ScalingAction validate(const RawAction& raw, const PipelineState& current,
                       const CooldownState& cooldowns, double now_s,
                       const ValidatorConfig& cfg = {});

}  // namespace scalelab
