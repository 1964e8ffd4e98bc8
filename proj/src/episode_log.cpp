#include "scalelab/episode_log.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scalelab {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_num(const std::string& s) {
    if (s.empty()) return 0.0;
    return std::strtod(s.c_str(), nullptr);
}

constexpr const char* kHeader =
    "round,t_s,source,backend_failed,epsilon,r_total,r_latency,r_cost,r_sla,"
    "r_proactive,r_pareto,clipped,l_before_ms,l_after_ms,c_before,c_after,"
    "throughput_rps,cost_billable,cost_effective,oracle_enabled,oracle_reward,"
    "xi,eta,action,oracle_action,context";

}  // namespace

std::string encode_action(const ScalingAction& a) {
    std::string s;
    for (std::size_t i = 0; i < a.stages.size(); ++i) {
        if (i) s += ';';
        const StageDelta& d = a.stages[i];
        s += std::to_string(d.replicas) + ':' + std::to_string(d.cpu_millicores) + ':' +
             std::to_string(d.memory_mb) + ':' + std::to_string(d.rate_ratio_tenths);
    }
    return s;
}

ScalingAction decode_action(const std::string& s) {
    ScalingAction a;
    if (s.empty()) return a;
    for (const std::string& part : split(s, ';')) {
        auto f = split(part, ':');
        if (f.size() != 4) throw std::invalid_argument("bad action encoding: " + part);
        StageDelta d;
        d.replicas = std::atoi(f[0].c_str());
        d.cpu_millicores = std::atoi(f[1].c_str());
        d.memory_mb = std::atoi(f[2].c_str());
        d.rate_ratio_tenths = std::atoi(f[3].c_str());
        a.stages.push_back(d);
    }
    return a;
}

std::string encode_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ';';
        s += num(v[i]);
    }
    return s;
}

std::vector<double> decode_doubles(const std::string& s) {
    std::vector<double> v;
    if (s.empty()) return v;
    for (const std::string& part : split(s, ';')) v.push_back(parse_num(part));
    return v;
}

void EpisodeLog::to_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << kHeader << '\n';
    for (const EpisodeRecord& r : records) {
        out << r.round << ',' << num(r.t_s) << ',' << r.source << ','
            << (r.backend_failed ? 1 : 0) << ',' << num(r.epsilon) << ','
            << num(r.reward.total) << ',' << num(r.reward.latency) << ','
            << num(r.reward.cost) << ',' << num(r.reward.sla) << ','
            << num(r.reward.proactive) << ',' << num(r.reward.pareto) << ','
            << (r.reward.clipped ? 1 : 0) << ',' << num(r.l_before_ms) << ','
            << num(r.l_after_ms) << ',' << num(r.c_before) << ',' << num(r.c_after) << ','
            << num(r.throughput_rps) << ',' << num(r.cost_billable) << ','
            << num(r.cost_effective) << ',' << (r.oracle_enabled ? 1 : 0) << ','
            << num(r.oracle_reward) << ',' << num(r.xi) << ',' << num(r.eta) << ','
            << encode_action(r.action) << ',' << encode_action(r.oracle_action) << ','
            << encode_doubles(r.context) << '\n';
    }
}

EpisodeLog EpisodeLog::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
    if (line != kHeader) throw std::runtime_error("unrecognized header in " + path);
    EpisodeLog log;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 26)
            throw std::runtime_error("bad row (" + std::to_string(f.size()) +
                                     " fields) in " + path);
        EpisodeRecord r;
        r.round = std::atoi(f[0].c_str());
        r.t_s = parse_num(f[1]);
        r.source = f[2];
        r.backend_failed = f[3] == "1";
        r.epsilon = parse_num(f[4]);
        r.reward.total = parse_num(f[5]);
        r.reward.latency = parse_num(f[6]);
        r.reward.cost = parse_num(f[7]);
        r.reward.sla = parse_num(f[8]);
        r.reward.proactive = parse_num(f[9]);
        r.reward.pareto = parse_num(f[10]);
        r.reward.clipped = f[11] == "1";
        r.l_before_ms = parse_num(f[12]);
        r.l_after_ms = parse_num(f[13]);
        r.c_before = parse_num(f[14]);
        r.c_after = parse_num(f[15]);
        r.throughput_rps = parse_num(f[16]);
        r.cost_billable = parse_num(f[17]);
        r.cost_effective = parse_num(f[18]);
        r.oracle_enabled = f[19] == "1";
        r.oracle_reward = parse_num(f[20]);
        r.xi = parse_num(f[21]);
        r.eta = parse_num(f[22]);
        r.action = decode_action(f[23]);
        r.oracle_action = decode_action(f[24]);
        r.context = decode_doubles(f[25]);
        log.records.push_back(std::move(r));
    }
    return log;
}

}  // namespace scalelab
