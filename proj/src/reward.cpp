#include "scalelab/reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scalelab {

double action_magnitude(const ScalingAction& action) {
    double mu = 0.0;
    for (const StageDelta& d : action.stages) {
        mu += std::abs(d.replicas);
        mu += 0.5 * (std::abs(d.cpu_millicores) / static_cast<double>(kCpuStepMillicores) +
                     std::abs(d.memory_mb) / static_cast<double>(kMemStepMb) +
                     std::abs(d.rate_ratio_tenths) / 10.0);
    }
    mu += 0.5 * action.stages_scaled();
    return mu;
}

RewardBreakdown compute_reward(const RewardInputs& in, const ScalingAction& action,
                               const ParetoFrontier& frontier, const RewardConfig& cfg) {
    if (cfg.t_sla_ms <= 0.0) throw std::invalid_argument("reward: t_sla_ms must be positive");
    double l_base = cfg.resolved_l_baseline();
    if (l_base <= 0.0 || cfg.c_budget <= 0.0)
        throw std::invalid_argument("reward: normalizers must be positive");

    RewardBreakdown out;
    out.latency = cfg.w_latency * (in.l_before_ms - in.l_after_ms) / l_base;
    out.cost = -cfg.w_cost * (in.c_after - in.c_before) / cfg.c_budget;
    if (in.l_after_ms > cfg.t_sla_ms) {
        double ratio = in.l_after_ms / cfg.t_sla_ms;
        out.sla = -(ratio * ratio) + 1.0;
    }
    // urgency is judged on the latency the action was reacting to
    double sigma = std::max(0.0, in.l_before_ms / cfg.t_sla_ms - 1.0);
    out.proactive = sigma * action_magnitude(action) * cfg.w_proactive;
    out.pareto = frontier.reward(frontier.normalize(in.l_after_ms, in.c_after));

    double sum = out.latency + out.cost + out.sla + out.proactive + out.pareto;
    out.total = std::clamp(sum, -cfg.r_max, cfg.r_max);
    out.clipped = out.total != sum;
    return out;
}

}  // namespace scalelab
