#include "scalelab/validator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scalelab {

CooldownState::CooldownState(std::size_t n_stages)
    : stages_(n_stages, Entry{-std::numeric_limits<double>::infinity(),
                              -std::numeric_limits<double>::infinity()}) {}

bool CooldownState::up_blocked(std::size_t stage, double now_s,
                               const ValidatorConfig& cfg) const {
    return now_s - stages_.at(stage).last_up_s < cfg.cooldown_up_s;
}

bool CooldownState::down_blocked(std::size_t stage, double now_s,
                                 const ValidatorConfig& cfg) const {
    return now_s - stages_.at(stage).last_down_s < cfg.cooldown_down_s;
}

void CooldownState::note(const ScalingAction& executed, double now_s) {
    for (std::size_t i = 0; i < executed.stages.size() && i < stages_.size(); ++i) {
        if (executed.stages[i].replicas > 0) stages_[i].last_up_s = now_s;
        if (executed.stages[i].replicas < 0) stages_[i].last_down_s = now_s;
    }
}

namespace {

// Nearest grid value; distance ties resolve toward the smaller magnitude.
template <std::size_t N>
int snap(double raw, const std::array<int, N>& grid, double scale = 1.0) {
    if (!std::isfinite(raw)) return 0;
    double v = raw / scale;
    int best = grid[0];
    double best_d = std::abs(v - grid[0]);
    for (std::size_t k = 1; k < N; ++k) {
        double d = std::abs(v - grid[k]);
        if (d < best_d - 1e-9 ||
            (std::abs(d - best_d) <= 1e-9 && std::abs(grid[k]) < std::abs(best))) {
            best = grid[k];
            best_d = d;
        }
    }
    return best;
}

double field_or_nan(const nlohmann::json& obj, const char* key,
                    const std::string& stage, std::vector<std::string>* notes) {
    if (!obj.contains(key)) return std::numeric_limits<double>::quiet_NaN();
    const auto& v = obj.at(key);
    if (v.is_number()) return v.get<double>();
    if (notes)
        notes->push_back("stage " + stage + ": ignoring non-numeric \"" + key + "\"");
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

RawAction absolute_to_delta(const nlohmann::json& proposal, const PipelineState& current,
                            std::vector<std::string>* notes) {
    RawAction out;
    out.stages.resize(current.stages.size());
    if (!proposal.is_object()) {
        if (notes) notes->push_back("proposal is not an object; treating as no-op");
        return out;
    }
    for (std::size_t i = 0; i < current.stages.size(); ++i) {
        const StageSnapshot& cur = current.stages[i];
        RawStageDelta& d = out.stages[i];
        if (!proposal.contains(cur.name)) continue;
        const nlohmann::json& stage = proposal.at(cur.name);
        if (!stage.is_object()) {
            if (notes)
                notes->push_back("stage " + cur.name + ": entry is not an object");
            continue;
        }
        if (stage.contains("action") && stage.at("action").is_string() &&
            stage.at("action").get<std::string>() == "none")
            continue;
        double v = field_or_nan(stage, "replicas", cur.name, notes);
        if (!std::isnan(v)) d.replicas = v - cur.config.replicas;
        v = field_or_nan(stage, "cpu_millicores", cur.name, notes);
        if (!std::isnan(v)) d.cpu_millicores = v - cur.config.cpu_millicores;
        v = field_or_nan(stage, "memory_mb", cur.name, notes);
        if (!std::isnan(v)) d.memory_mb = v - cur.config.memory_mb;
        v = field_or_nan(stage, "rate_ratio", cur.name, notes);
        if (!std::isnan(v)) d.rate_ratio = v - cur.config.rate_ratio;
    }
    return out;
}

ScalingAction validate(const RawAction& raw, const PipelineState& current,
                       const CooldownState& cooldowns, double now_s,
                       const ValidatorConfig& cfg) {
    ScalingAction out = ScalingAction::noop(current.stages.size());
    for (std::size_t i = 0; i < current.stages.size(); ++i) {
        const StageSnapshot& cur = current.stages[i];
        RawStageDelta req = i < raw.stages.size() ? raw.stages[i] : RawStageDelta{};
        StageDelta& d = out.stages[i];

        int dn = snap(req.replicas, kReplicaDeltas);
        int target_n = std::clamp(cur.config.replicas + dn, cfg.n_min, cfg.n_max);
        dn = target_n - cur.config.replicas;
        if (dn > 0 && cooldowns.up_blocked(i, now_s, cfg)) dn = 0;
        if (dn < 0 && cooldowns.down_blocked(i, now_s, cfg)) dn = 0;
        d.replicas = std::clamp(dn, kReplicaDeltas.front(), kReplicaDeltas.back());

        if (cur.kind == StageKind::Cpu) {
            int dc = snap(req.cpu_millicores, kCpuDeltas);
            // steps that would cross the floor are dropped, keeping the
            // executed delta on the grid
            if (cur.config.cpu_millicores + dc < cfg.cpu_floor_millicores) dc = 0;
            d.cpu_millicores = dc;
            int dm = snap(req.memory_mb, kMemDeltas);
            if (cur.config.memory_mb + dm < cfg.memory_floor_mb) dm = 0;
            d.memory_mb = dm;
        } else {
            int dt = snap(req.rate_ratio, kRateTenthDeltas, 0.1);
            int cur_tenths = static_cast<int>(std::llround(cur.config.rate_ratio * 10.0));
            int target = std::clamp(cur_tenths + dt, cfg.rate_min_tenths, 10);
            d.rate_ratio_tenths = std::clamp(target - cur_tenths, kRateTenthDeltas.front(),
                                             kRateTenthDeltas.back());
        }
    }
    return out;
}

}  // namespace scalelab
