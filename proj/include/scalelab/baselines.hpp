#pragma once

#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "scalelab/action.hpp"
#include "scalelab/types.hpp"

namespace scalelab {

struct BaselineConfig {
    std::string kind = "static";  // static | hpa_cpu | threshold | vpa
    double hpa_target_util = 0.70;
    double hpa_stabilization_s = 60.0;
    double threshold_cpu_ms = 100.0;
    double threshold_gpu_ms = 200.0;
    double threshold_cooldown_s = 60.0;
    double vpa_headroom = 1.15;
    int vpa_window_intervals = 5;
    int n_min = 1;
    int n_max = 8;
    int cpu_floor_millicores = 100;
};

// A reference controller: observes the windowed pipeline state once per
// decision interval and emits an on-grid action. Implementations keep their
// own timers/windows; outputs always respect replica and resource bounds, so
// the validator passes them through unchanged.
class BaselineController {
public:
    virtual ~BaselineController() = default;
    virtual ScalingAction decide(const PipelineState& state, double now_s) = 0;
    virtual std::string name() const = 0;
};

// Fixed allocation, never acts.
class StaticController : public BaselineController {
public:
    ScalingAction decide(const PipelineState& state, double) override {
        return ScalingAction::noop(state.stages.size());
    }
    std::string name() const override { return "static"; }
};

// Replica scaling toward a target busy fraction, one stage at a time, with a
// per-stage stabilization window. Only touches CPU-kind stages.
class HpaCpuController : public BaselineController {
public:
    explicit HpaCpuController(BaselineConfig cfg);
    ScalingAction decide(const PipelineState& state, double now_s) override;
    std::string name() const override { return "hpa_cpu"; }

private:
    BaselineConfig cfg_;
    std::vector<double> last_change_s_;
};

// Per-stage latency thresholds: scale out above the threshold, back in below
// half of it, with a per-stage cooldown.
class ThresholdController : public BaselineController {
public:
    explicit ThresholdController(BaselineConfig cfg);
    ScalingAction decide(const PipelineState& state, double now_s) override;
    std::string name() const override { return "threshold"; }

private:
    BaselineConfig cfg_;
    std::vector<double> last_change_s_;
};

// Vertical sizing: tracks peak CPU consumption (busy fraction x allocation)
// over a trailing window and steps the allocation toward peak x headroom.
// Replica counts and memory are left alone.
class VpaController : public BaselineController {
public:
    explicit VpaController(BaselineConfig cfg);
    ScalingAction decide(const PipelineState& state, double now_s) override;
    std::string name() const override { return "vpa"; }

private:
    BaselineConfig cfg_;
    std::vector<std::deque<double>> usage_window_;
};

// Throws on unknown kind or out-of-range parameters.
std::unique_ptr<BaselineController> make_baseline(const BaselineConfig& cfg);

}  // namespace scalelab
