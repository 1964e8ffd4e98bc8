#pragma once

#include "scalelab/action.hpp"
#include "scalelab/pareto.hpp"

namespace scalelab {

struct RewardConfig {
    double t_sla_ms = 500.0;
    double l_baseline_ms = 0.0;  // 0 = default to 4 * t_sla_ms
    double c_budget = 10.0;      // effective $/hour the run is expected to stay under
    double w_latency = 0.7;
    double w_cost = 0.3;
    double w_proactive = 0.3;
    double r_max = 5.0;

    double resolved_l_baseline() const {
        return l_baseline_ms > 0.0 ? l_baseline_ms : 4.0 * t_sla_ms;
    }
};

// Window measurements bracketing one executed action.
struct RewardInputs {
    double l_before_ms = 0.0;  // p99 going into the round
    double l_after_ms = 0.0;   // p99 after the settling window
    double c_before = 0.0;     // effective $/hour rate
    double c_after = 0.0;
};

struct RewardBreakdown {
    double latency = 0.0;
    double cost = 0.0;
    double sla = 0.0;
    double proactive = 0.0;
    double pareto = 0.0;
    double total = 0.0;
    bool clipped = false;
};

// Aggregate action magnitude: replica moves count 1 apiece, resource steps
// half a unit per grid step, plus half a unit per touched stage.
double action_magnitude(const ScalingAction& action);

// Five-part shaped reward. The frontier is consulted read-only (the caller
// inserts the new operating point afterwards), so the pareto term is scored
// against the frontier as the action saw it.
RewardBreakdown compute_reward(const RewardInputs& in, const ScalingAction& action,
                               const ParetoFrontier& frontier, const RewardConfig& cfg);

}  // namespace scalelab
