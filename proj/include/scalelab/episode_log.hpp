#pragma once

#include <string>
#include <vector>

#include "scalelab/action.hpp"
#include "scalelab/reward.hpp"

namespace scalelab {

// One decision round, flattened for analysis. Oracle fields are NaN when the
// oracle was off; xi/eta are additionally NaN on probe rounds, where they are
// not attributed.
struct EpisodeRecord {
    int round = 0;
    double t_s = 0.0;
    std::string source;  // probe | mock | llm | static | hpa_cpu | threshold | vpa
    bool backend_failed = false;
    double epsilon = 0.0;
    std::vector<double> context;  // pre-action features
    ScalingAction action;         // executed, post-validation
    RewardBreakdown reward;
    double l_before_ms = 0.0, l_after_ms = 0.0;
    double c_before = 0.0, c_after = 0.0;  // effective $/hour rates
    double throughput_rps = 0.0;
    double cost_billable = 0.0, cost_effective = 0.0;  // $ this interval
    bool oracle_enabled = false;
    double oracle_reward = 0.0, xi = 0.0, eta = 0.0;
    ScalingAction oracle_action;
};

struct EpisodeLog {
    std::vector<EpisodeRecord> records;

    void to_csv(const std::string& path) const;
    static EpisodeLog from_csv(const std::string& path);
};

// Compact field encodings shared by the CSV writer and parser.
std::string encode_action(const ScalingAction& a);
ScalingAction decode_action(const std::string& s);
std::string encode_doubles(const std::vector<double>& v);
std::vector<double> decode_doubles(const std::string& s);

}  // namespace scalelab
