#include "scalelab/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace scalelab {

namespace {

[[noreturn]] void bad(const std::string& what) { throw std::runtime_error(what); }

StageKind kind_from(const std::string& s) {
    if (s == "cpu") return StageKind::Cpu;
    if (s == "gpu") return StageKind::Gpu;
    bad("stage kind must be \"cpu\" or \"gpu\", got \"" + s + "\"");
}

const char* kind_name(StageKind k) { return k == StageKind::Gpu ? "gpu" : "cpu"; }

WorkloadKind workload_from(const std::string& s) {
    if (s == "poisson") return WorkloadKind::Poisson;
    if (s == "ramp") return WorkloadKind::Ramp;
    if (s == "burst") return WorkloadKind::Burst;
    bad("workload kind must be poisson|ramp|burst, got \"" + s + "\"");
}

const char* workload_name(WorkloadKind k) {
    switch (k) {
        case WorkloadKind::Poisson: return "poisson";
        case WorkloadKind::Ramp: return "ramp";
        case WorkloadKind::Burst: return "burst";
    }
    return "poisson";
}

}  // namespace

SimulatorConfig Scenario::sim_config() const {
    SimulatorConfig cfg;
    cfg.stages = stages;
    cfg.initial = initial;
    cfg.workload = workload;
    cfg.workload.seed = seed;
    cfg.tick_s = tick_s;
    cfg.seed = seed;
    return cfg;
}

void validate_scenario(Scenario& s) {
    if (s.stages.empty()) bad("scenario \"" + s.name + "\": needs at least one stage");
    std::set<std::string> names;
    for (const StageSpec& sp : s.stages) {
        if (sp.name.empty()) bad("scenario \"" + s.name + "\": stage with empty name");
        if (!names.insert(sp.name).second)
            bad("scenario \"" + s.name + "\": duplicate stage name \"" + sp.name + "\"");
        if (sp.base_service_rate <= 0)
            bad("stage \"" + sp.name + "\": base_service_rate must be > 0");
        if (sp.cpu_ref_millicores <= 0)
            bad("stage \"" + sp.name + "\": cpu_ref_millicores must be > 0");
        if (sp.startup_delay_s < 0)
            bad("stage \"" + sp.name + "\": startup_delay_s must be >= 0");
        if (sp.gpu_blocks_per_request <= 0)
            bad("stage \"" + sp.name + "\": gpu_blocks_per_request must be > 0");
    }
    if (!s.initial.empty() && s.initial.size() != s.stages.size())
        bad("scenario \"" + s.name + "\": initial allocations (" +
            std::to_string(s.initial.size()) + ") do not match stages (" +
            std::to_string(s.stages.size()) + ")");
    s.initial.resize(s.stages.size());

    static const std::set<std::string> kControllers{"icrl-mock", "icrl-llm", "static",
                                                   "hpa_cpu",   "threshold", "vpa"};
    if (!kControllers.count(s.controller))
        bad("scenario \"" + s.name + "\": unknown controller \"" + s.controller + "\"");
    if (s.rounds <= 0) bad("scenario \"" + s.name + "\": rounds must be > 0");
    if (s.tick_s <= 0) bad("scenario \"" + s.name + "\": tick_s must be > 0");
    if (s.settle_s < 0 || s.measure_s <= 0)
        bad("scenario \"" + s.name + "\": settle_s must be >= 0 and measure_s > 0");
    if (s.workload.base_rate < 0) bad("scenario \"" + s.name + "\": base_rate must be >= 0");
    if (s.workload.kind == WorkloadKind::Burst &&
        (s.workload.burst_period_s <= 0 || s.workload.burst_duty <= 0 ||
         s.workload.burst_duty > 1))
        bad("scenario \"" + s.name + "\": burst needs period > 0 and duty in (0, 1]");
    if (s.reward.t_sla_ms <= 0) bad("scenario \"" + s.name + "\": t_sla_ms must be > 0");
    if (s.reward.r_max <= 0) bad("scenario \"" + s.name + "\": r_max must be > 0");
    if (s.frontier_l_max_ms <= 0 || s.frontier_c_max <= 0)
        bad("scenario \"" + s.name + "\": frontier bounds must be > 0");
    if (s.eps0 < 0 || s.eps0 > 1 || s.eps_floor < 0 || s.eps_floor > s.eps0 ||
        s.eps_decay <= 0 || s.eps_decay > 1)
        bad("scenario \"" + s.name + "\": exploration schedule out of range");
    if (s.selection.m == 0) bad("scenario \"" + s.name + "\": selection.m must be > 0");
    if (s.mock.scale_up_util <= 0 || s.mock.scale_up_util > 1 || s.mock.scale_down_util < 0 ||
        s.mock.scale_down_util >= s.mock.scale_up_util || s.mock.scale_down_latency_frac <= 0 ||
        s.mock.scale_down_latency_frac > 1)
        bad("scenario \"" + s.name + "\": mock thresholds out of range");

    for (std::size_t i = 0; i < s.initial.size(); ++i) {
        ResourceConfig& rc = s.initial[i];
        rc.replicas = std::clamp(rc.replicas, s.limits.n_min, s.limits.n_max);
        if (rc.cpu_millicores < s.limits.cpu_floor_millicores)
            bad("stage \"" + s.stages[i].name + "\": initial cpu below floor");
        if (rc.memory_mb < s.limits.memory_floor_mb)
            bad("stage \"" + s.stages[i].name + "\": initial memory below floor");
        if (s.stages[i].kind == StageKind::Gpu) {
            if (rc.rate_ratio < s.limits.rate_min_tenths / 10.0 - 1e-12 ||
                rc.rate_ratio > 1.0 + 1e-12)
                bad("stage \"" + s.stages[i].name + "\": initial rate_ratio out of [" +
                    std::to_string(s.limits.rate_min_tenths / 10.0) + ", 1]");
        } else {
            rc.rate_ratio = 1.0;
        }
    }
    s.baseline.kind = s.controller;  // harmless for agent runs
    s.baseline.n_min = s.limits.n_min;
    s.baseline.n_max = s.limits.n_max;
    s.baseline.cpu_floor_millicores = s.limits.cpu_floor_millicores;
}

Scenario scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object()) bad("scenario root must be a JSON object");
    Scenario s;
    s.name = j.value("name", s.name);
    s.controller = j.value("controller", s.controller);
    s.seed = j.value("seed", s.seed);
    s.rounds = j.value("rounds", s.rounds);
    s.tick_s = j.value("tick_s", s.tick_s);
    s.settle_s = j.value("settle_s", s.settle_s);
    s.measure_s = j.value("measure_s", s.measure_s);
    s.r_min = j.value("r_min", s.r_min);
    s.oracle = j.value("oracle", s.oracle);
    s.experience_path = j.value("experience_path", s.experience_path);

    if (!j.contains("stages") || !j["stages"].is_array() || j["stages"].empty())
        bad("scenario \"" + s.name + "\": \"stages\" must be a non-empty array");
    for (const auto& js : j["stages"]) {
        if (!js.is_object()) bad("scenario \"" + s.name + "\": stage entries must be objects");
        StageSpec sp;
        sp.name = js.value("name", std::string{});
        sp.kind = kind_from(js.value("kind", std::string{"cpu"}));
        sp.base_service_rate = js.value("base_service_rate", sp.base_service_rate);
        sp.cpu_sensitivity = js.value("cpu_sensitivity", sp.cpu_sensitivity);
        sp.cpu_ref_millicores = js.value("cpu_ref_millicores", sp.cpu_ref_millicores);
        sp.memory_floor_mb = js.value("memory_floor_mb", sp.memory_floor_mb);
        sp.queue_capacity = js.value("queue_capacity", sp.queue_capacity);
        sp.startup_delay_s = js.value("startup_delay_s", sp.startup_delay_s);
        sp.gpu_blocks_per_request = js.value("gpu_blocks_per_request", sp.gpu_blocks_per_request);
        s.stages.push_back(sp);

        ResourceConfig rc;
        if (js.contains("initial")) {
            const auto& ji = js["initial"];
            if (!ji.is_object()) bad("stage \"" + sp.name + "\": \"initial\" must be an object");
            rc.replicas = ji.value("replicas", rc.replicas);
            rc.cpu_millicores = ji.value("cpu_millicores", rc.cpu_millicores);
            rc.memory_mb = ji.value("memory_mb", rc.memory_mb);
            rc.rate_ratio = ji.value("rate_ratio", rc.rate_ratio);
        }
        s.initial.push_back(rc);
    }

    if (j.contains("workload")) {
        const auto& jw = j["workload"];
        if (!jw.is_object()) bad("scenario \"" + s.name + "\": \"workload\" must be an object");
        s.workload.kind = workload_from(jw.value("kind", std::string{"poisson"}));
        s.workload.base_rate = jw.value("base_rate", s.workload.base_rate);
        s.workload.ramp_slope = jw.value("ramp_slope", s.workload.ramp_slope);
        s.workload.burst_amplitude = jw.value("burst_amplitude", s.workload.burst_amplitude);
        s.workload.burst_period_s = jw.value("burst_period_s", s.workload.burst_period_s);
        s.workload.burst_duty = jw.value("burst_duty", s.workload.burst_duty);
    }
    if (j.contains("reward")) {
        const auto& jr = j["reward"];
        s.reward.t_sla_ms = jr.value("t_sla_ms", s.reward.t_sla_ms);
        s.reward.l_baseline_ms = jr.value("l_baseline_ms", s.reward.l_baseline_ms);
        s.reward.c_budget = jr.value("c_budget", s.reward.c_budget);
        s.reward.w_latency = jr.value("w_latency", s.reward.w_latency);
        s.reward.w_cost = jr.value("w_cost", s.reward.w_cost);
        s.reward.w_proactive = jr.value("w_proactive", s.reward.w_proactive);
        s.reward.r_max = jr.value("r_max", s.reward.r_max);
    }
    if (j.contains("limits")) {
        const auto& jl = j["limits"];
        s.limits.n_min = jl.value("n_min", s.limits.n_min);
        s.limits.n_max = jl.value("n_max", s.limits.n_max);
        s.limits.cpu_floor_millicores = jl.value("cpu_floor_millicores", s.limits.cpu_floor_millicores);
        s.limits.memory_floor_mb = jl.value("memory_floor_mb", s.limits.memory_floor_mb);
        s.limits.rate_min_tenths = jl.value("rate_min_tenths", s.limits.rate_min_tenths);
        s.limits.cooldown_up_s = jl.value("cooldown_up_s", s.limits.cooldown_up_s);
        s.limits.cooldown_down_s = jl.value("cooldown_down_s", s.limits.cooldown_down_s);
    }
    if (j.contains("selection")) {
        const auto& js = j["selection"];
        s.selection.m = js.value("m", s.selection.m);
        s.selection.lambda_div = js.value("lambda_div", s.selection.lambda_div);
        s.selection.sigma_sim = js.value("sigma_sim", s.selection.sigma_sim);
        s.selection.locally_weighted_mean =
            js.value("locally_weighted_mean", s.selection.locally_weighted_mean);
    }
    if (j.contains("frontier")) {
        const auto& jf = j["frontier"];
        s.frontier_l_max_ms = jf.value("l_max_ms", s.frontier_l_max_ms);
        s.frontier_c_max = jf.value("c_max", s.frontier_c_max);
    }
    if (j.contains("exploration")) {
        const auto& je = j["exploration"];
        s.eps0 = je.value("eps0", s.eps0);
        s.eps_decay = je.value("decay", s.eps_decay);
        s.eps_floor = je.value("floor", s.eps_floor);
    }
    if (j.contains("baseline")) {
        const auto& jb = j["baseline"];
        s.baseline.hpa_target_util = jb.value("hpa_target_util", s.baseline.hpa_target_util);
        s.baseline.hpa_stabilization_s =
            jb.value("hpa_stabilization_s", s.baseline.hpa_stabilization_s);
        s.baseline.threshold_cpu_ms = jb.value("threshold_cpu_ms", s.baseline.threshold_cpu_ms);
        s.baseline.threshold_gpu_ms = jb.value("threshold_gpu_ms", s.baseline.threshold_gpu_ms);
        s.baseline.threshold_cooldown_s =
            jb.value("threshold_cooldown_s", s.baseline.threshold_cooldown_s);
        s.baseline.vpa_headroom = jb.value("vpa_headroom", s.baseline.vpa_headroom);
        s.baseline.vpa_window_intervals =
            jb.value("vpa_window_intervals", s.baseline.vpa_window_intervals);
    }
    if (j.contains("mock")) {
        const auto& jm = j["mock"];
        s.mock.scale_up_util = jm.value("scale_up_util", s.mock.scale_up_util);
        s.mock.scale_down_util = jm.value("scale_down_util", s.mock.scale_down_util);
        s.mock.scale_down_latency_frac =
            jm.value("scale_down_latency_frac", s.mock.scale_down_latency_frac);
        s.mock.veto_similarity = jm.value("veto_similarity", s.mock.veto_similarity);
    }

    validate_scenario(s);
    return s;
}

nlohmann::json scenario_to_json(const Scenario& s) {
    nlohmann::json j;
    j["name"] = s.name;
    j["controller"] = s.controller;
    j["seed"] = s.seed;
    j["rounds"] = s.rounds;
    j["tick_s"] = s.tick_s;
    j["settle_s"] = s.settle_s;
    j["measure_s"] = s.measure_s;
    j["r_min"] = s.r_min;
    j["oracle"] = s.oracle;
    if (!s.experience_path.empty()) j["experience_path"] = s.experience_path;
    j["stages"] = nlohmann::json::array();
    for (std::size_t i = 0; i < s.stages.size(); ++i) {
        const StageSpec& sp = s.stages[i];
        nlohmann::json js;
        js["name"] = sp.name;
        js["kind"] = kind_name(sp.kind);
        js["base_service_rate"] = sp.base_service_rate;
        js["cpu_sensitivity"] = sp.cpu_sensitivity;
        js["cpu_ref_millicores"] = sp.cpu_ref_millicores;
        js["memory_floor_mb"] = sp.memory_floor_mb;
        js["queue_capacity"] = sp.queue_capacity;
        js["startup_delay_s"] = sp.startup_delay_s;
        js["gpu_blocks_per_request"] = sp.gpu_blocks_per_request;
        const ResourceConfig& rc = s.initial[i];
        js["initial"] = {{"replicas", rc.replicas},
                         {"cpu_millicores", rc.cpu_millicores},
                         {"memory_mb", rc.memory_mb},
                         {"rate_ratio", rc.rate_ratio}};
        j["stages"].push_back(js);
    }
    j["workload"] = {{"kind", workload_name(s.workload.kind)},
                     {"base_rate", s.workload.base_rate},
                     {"ramp_slope", s.workload.ramp_slope},
                     {"burst_amplitude", s.workload.burst_amplitude},
                     {"burst_period_s", s.workload.burst_period_s},
                     {"burst_duty", s.workload.burst_duty}};
    j["reward"] = {{"t_sla_ms", s.reward.t_sla_ms}, {"l_baseline_ms", s.reward.l_baseline_ms},
                   {"c_budget", s.reward.c_budget}, {"w_latency", s.reward.w_latency},
                   {"w_cost", s.reward.w_cost},     {"w_proactive", s.reward.w_proactive},
                   {"r_max", s.reward.r_max}};
    j["limits"] = {{"n_min", s.limits.n_min},
                   {"n_max", s.limits.n_max},
                   {"cpu_floor_millicores", s.limits.cpu_floor_millicores},
                   {"memory_floor_mb", s.limits.memory_floor_mb},
                   {"rate_min_tenths", s.limits.rate_min_tenths},
                   {"cooldown_up_s", s.limits.cooldown_up_s},
                   {"cooldown_down_s", s.limits.cooldown_down_s}};
    j["selection"] = {{"m", s.selection.m},
                      {"lambda_div", s.selection.lambda_div},
                      {"sigma_sim", s.selection.sigma_sim},
                      {"locally_weighted_mean", s.selection.locally_weighted_mean}};
    j["frontier"] = {{"l_max_ms", s.frontier_l_max_ms}, {"c_max", s.frontier_c_max}};
    j["exploration"] = {{"eps0", s.eps0}, {"decay", s.eps_decay}, {"floor", s.eps_floor}};
    j["baseline"] = {{"hpa_target_util", s.baseline.hpa_target_util},
                     {"hpa_stabilization_s", s.baseline.hpa_stabilization_s},
                     {"threshold_cpu_ms", s.baseline.threshold_cpu_ms},
                     {"threshold_gpu_ms", s.baseline.threshold_gpu_ms},
                     {"threshold_cooldown_s", s.baseline.threshold_cooldown_s},
                     {"vpa_headroom", s.baseline.vpa_headroom},
                     {"vpa_window_intervals", s.baseline.vpa_window_intervals}};
    j["mock"] = {{"scale_up_util", s.mock.scale_up_util},
                 {"scale_down_util", s.mock.scale_down_util},
                 {"scale_down_latency_frac", s.mock.scale_down_latency_frac},
                 {"veto_similarity", s.mock.veto_similarity}};
    return j;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        bad("scenario file " + path + " is not valid JSON: " + e.what());
    }
    try {
        return scenario_from_json(j);
    } catch (const std::exception& e) {
        bad(std::string{e.what()} + " (file: " + path + ")");
    }
}

}  // namespace scalelab
