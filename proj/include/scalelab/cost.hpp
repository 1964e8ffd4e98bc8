#pragma once

#include "scalelab/types.hpp"

namespace scalelab {

// Pricing for the two cost views: billable charges whole GPUs, effective
// charges the admitted fraction (shared-GPU accounting). CPU-core cost
// applies to every stage in both views.
struct CostModel {
    enum class Mode { Billable, Effective };
    double p_cpu_core_hour = 0.048;
    double p_gpu_hour = 3.06;
    Mode mode = Mode::Effective;
};

inline double cost_rate_per_hour(const PipelineState& state, const CostModel& m) {
    double usd = 0.0;
    for (const auto& s : state.stages) {
        usd += s.config.replicas * (s.config.cpu_millicores / 1000.0) * m.p_cpu_core_hour;
        if (s.kind == StageKind::Gpu) {
            double frac = m.mode == CostModel::Mode::Billable ? 1.0 : s.config.rate_ratio;
            usd += s.config.replicas * frac * m.p_gpu_hour;
        }
    }
    return usd;
}

inline double interval_cost(const PipelineState& state, const CostModel& m, double dt_s) {
    return cost_rate_per_hour(state, m) * dt_s / 3600.0;
}

}  // namespace scalelab
