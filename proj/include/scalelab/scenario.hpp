#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "scalelab/baselines.hpp"
#include "scalelab/experience.hpp"
#include "scalelab/policy.hpp"
#include "scalelab/reward.hpp"
#include "scalelab/simulator.hpp"
#include "scalelab/validator.hpp"

namespace scalelab {

// Everything one run needs, loadable from a JSON file. Defaults are chosen so
// a scenario listing only stages and a workload is already runnable.
struct Scenario {
    std::string name = "unnamed";
    std::vector<StageSpec> stages;
    std::vector<ResourceConfig> initial;  // sized to stages by validate()
    WorkloadPattern workload;
    double tick_s = 0.1;
    int rounds = 50;
    double settle_s = 20.0;
    double measure_s = 10.0;
    // icrl-mock | icrl-llm | static | hpa_cpu | threshold | vpa
    std::string controller = "icrl-mock";
    std::uint64_t seed = 1;
    RewardConfig reward;
    ValidatorConfig limits;
    SelectionConfig selection;
    double r_min = 0.0;
    bool oracle = false;
    double frontier_l_max_ms = 2000.0;
    double frontier_c_max = 10.0;
    BaselineConfig baseline;
    MockThresholds mock;
    double eps0 = 0.15, eps_decay = 0.95, eps_floor = 0.05;
    std::string experience_path;  // optional JSONL persistence for the store

    bool is_agent() const { return controller == "icrl-mock" || controller == "icrl-llm"; }
    SimulatorConfig sim_config() const;
};

// Throws std::runtime_error naming the offending field. Also normalizes:
// sizes `initial` to the stage count and clamps initial replicas into
// [n_min, n_max].
void validate_scenario(Scenario& s);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

// Parse + validate. Errors carry the file path.
Scenario load_scenario(const std::string& path);

}  // namespace scalelab
