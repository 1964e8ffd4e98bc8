#include "scalelab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scalelab {

namespace {

void ensure(std::vector<double>& v, std::size_t n) {
    if (v.size() < n) v.resize(n, -1e18);
}

int clamp_replica_delta(int desired, int current, int n_min, int n_max) {
    int target = std::clamp(desired, n_min, n_max);
    return std::clamp(target - current, kReplicaDeltas.front(), kReplicaDeltas.back());
}

}  // namespace

HpaCpuController::HpaCpuController(BaselineConfig cfg) : cfg_(std::move(cfg)) {
    if (!(cfg_.hpa_target_util > 0.0 && cfg_.hpa_target_util < 1.0))
        throw std::invalid_argument("hpa: target utilization must be in (0, 1)");
}

ScalingAction HpaCpuController::decide(const PipelineState& state, double now_s) {
    ensure(last_change_s_, state.stages.size());
    ScalingAction a = ScalingAction::noop(state.stages.size());
    for (std::size_t i = 0; i < state.stages.size(); ++i) {
        const StageSnapshot& s = state.stages[i];
        if (s.kind != StageKind::Cpu) continue;
        if (now_s - last_change_s_[i] < cfg_.hpa_stabilization_s) continue;
        int desired = static_cast<int>(
            std::ceil(s.config.replicas * s.u_cpu / cfg_.hpa_target_util));
        desired = std::max(desired, 1);
        int dn = clamp_replica_delta(desired, s.config.replicas, cfg_.n_min, cfg_.n_max);
        if (dn != 0) {
            a.stages[i].replicas = dn;
            last_change_s_[i] = now_s;
        }
    }
    return a;
}

ThresholdController::ThresholdController(BaselineConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.threshold_cpu_ms <= 0.0 || cfg_.threshold_gpu_ms <= 0.0)
        throw std::invalid_argument("threshold: latency thresholds must be positive");
}

ScalingAction ThresholdController::decide(const PipelineState& state, double now_s) {
    ensure(last_change_s_, state.stages.size());
    ScalingAction a = ScalingAction::noop(state.stages.size());
    for (std::size_t i = 0; i < state.stages.size(); ++i) {
        const StageSnapshot& s = state.stages[i];
        if (now_s - last_change_s_[i] < cfg_.threshold_cooldown_s) continue;
        double limit =
            s.kind == StageKind::Gpu ? cfg_.threshold_gpu_ms : cfg_.threshold_cpu_ms;
        double stage_p99 = s.proc_ms_p99 + s.queue_delay_ms_p99;
        int dn = 0;
        if (stage_p99 > limit)
            dn = clamp_replica_delta(s.config.replicas + 1, s.config.replicas, cfg_.n_min,
                                     cfg_.n_max);
        else if (stage_p99 < 0.5 * limit)
            dn = clamp_replica_delta(s.config.replicas - 1, s.config.replicas, cfg_.n_min,
                                     cfg_.n_max);
        if (dn != 0) {
            a.stages[i].replicas = dn;
            last_change_s_[i] = now_s;
        }
    }
    return a;
}

VpaController::VpaController(BaselineConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.vpa_headroom <= 0.0 || cfg_.vpa_window_intervals < 1)
        throw std::invalid_argument("vpa: headroom and window must be positive");
}

ScalingAction VpaController::decide(const PipelineState& state, double) {
    if (usage_window_.size() < state.stages.size())
        usage_window_.resize(state.stages.size());
    ScalingAction a = ScalingAction::noop(state.stages.size());
    for (std::size_t i = 0; i < state.stages.size(); ++i) {
        const StageSnapshot& s = state.stages[i];
        if (s.kind != StageKind::Cpu) continue;  // no resource knobs on GPU stages
        auto& window = usage_window_[i];
        window.push_back(s.u_cpu * s.config.cpu_millicores);
        while (window.size() > static_cast<std::size_t>(cfg_.vpa_window_intervals))
            window.pop_front();
        double peak = *std::max_element(window.begin(), window.end());
        double rec = cfg_.vpa_headroom * peak;
        double gap = rec - s.config.cpu_millicores;
        // nearest step; exact midpoints stay put
        int dc = 0;
        if (gap > kCpuStepMillicores / 2.0) dc = kCpuStepMillicores;
        else if (gap < -kCpuStepMillicores / 2.0) dc = -kCpuStepMillicores;
        if (s.config.cpu_millicores + dc < cfg_.cpu_floor_millicores) dc = 0;
        a.stages[i].cpu_millicores = dc;
    }
    return a;
}

std::unique_ptr<BaselineController> make_baseline(const BaselineConfig& cfg) {
    if (cfg.kind == "static") return std::make_unique<StaticController>();
    if (cfg.kind == "hpa_cpu") return std::make_unique<HpaCpuController>(cfg);
    if (cfg.kind == "threshold") return std::make_unique<ThresholdController>(cfg);
    if (cfg.kind == "vpa") return std::make_unique<VpaController>(cfg);
    throw std::invalid_argument("unknown baseline kind: " + cfg.kind);
}

}  // namespace scalelab
