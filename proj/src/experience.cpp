#include "scalelab/experience.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace scalelab {

std::vector<double> context_features(const PipelineState& state) {
    std::vector<double> x;
    x.reserve(state.stages.size() * 7 + 2);
    for (const auto& s : state.stages) {
        x.push_back(static_cast<double>(s.config.replicas));
        x.push_back(static_cast<double>(s.config.cpu_millicores));
        x.push_back(static_cast<double>(s.config.memory_mb));
        x.push_back(s.config.rate_ratio);
        x.push_back(s.queue_depth);
        x.push_back(s.u_cpu);
        x.push_back(s.u_gpu_quota);
    }
    x.push_back(state.latency_p99_ms);
    x.push_back(state.throughput_rps);
    return x;
}

double similarity(const std::vector<double>& a, const std::vector<double>& b, double sigma) {
    if (a.size() != b.size())
        throw std::invalid_argument("similarity: dimension mismatch");
    if (sigma <= 0.0) throw std::invalid_argument("similarity: sigma must be positive");
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-d2 / (2.0 * sigma * sigma));
}

ExperienceBuffer::ExperienceBuffer(double r_min) : r_min_(r_min) {}

bool ExperienceBuffer::store(Experience e) {
    if (!(e.reward > r_min_)) {
        ++rejected_;
        return false;
    }
    if (items_.empty()) {
        sum_.assign(e.context.size(), 0.0);
        sum_sq_.assign(e.context.size(), 0.0);
    } else if (e.context.size() != sum_.size()) {
        throw std::invalid_argument("experience store: context dimension changed");
    }
    for (std::size_t i = 0; i < e.context.size(); ++i) {
        sum_[i] += e.context[i];
        sum_sq_[i] += e.context[i] * e.context[i];
    }
    items_.push_back(std::move(e));
    ++sigma_stale_count_;
    return true;
}

std::vector<double> ExperienceBuffer::standardize(const std::vector<double>& x) const {
    if (items_.empty()) return x;
    if (x.size() != sum_.size())
        throw std::invalid_argument("experience store: feature dimension mismatch");
    auto n = static_cast<double>(items_.size());
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double mean = sum_[i] / n;
        double var = std::max(0.0, sum_sq_[i] / n - mean * mean);
        double sd = std::sqrt(var);
        if (sd < 1e-12) sd = 1.0;
        z[i] = (x[i] - mean) / sd;
    }
    return z;
}

void ExperienceBuffer::refresh_sigma_cache() const {
    // median pairwise distance over (a deterministic subsample of) the buffer
    const std::size_t cap = 512;
    std::vector<std::size_t> idx;
    if (items_.size() <= cap) {
        idx.resize(items_.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
    } else {
        double stride = static_cast<double>(items_.size()) / cap;
        for (std::size_t k = 0; k < cap; ++k)
            idx.push_back(static_cast<std::size_t>(k * stride));
    }
    std::vector<std::vector<double>> z;
    z.reserve(idx.size());
    for (std::size_t i : idx) z.push_back(standardize(items_[i].context));
    std::vector<double> dists;
    dists.reserve(idx.size() * (idx.size() - 1) / 2);
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i + 1; j < z.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < z[i].size(); ++k) {
                double d = z[i][k] - z[j][k];
                d2 += d * d;
            }
            dists.push_back(std::sqrt(d2));
        }
    if (dists.empty()) {
        cached_sigma_ = 1.0;
    } else {
        auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
        std::nth_element(dists.begin(), mid, dists.end());
        cached_sigma_ = *mid > 1e-12 ? *mid : 1.0;
    }
    sigma_stale_count_ = 0;
}

double ExperienceBuffer::effective_sigma(const SelectionConfig& cfg) const {
    if (cfg.sigma_sim > 0.0) return cfg.sigma_sim;
    if (items_.size() < 2) return 1.0;
    if (cached_sigma_ == 0.0 || sigma_stale_count_ >= 50) refresh_sigma_cache();
    return cached_sigma_;
}

double ExperienceBuffer::loo_mean(std::size_t index, const SelectionConfig& cfg) const {
    if (items_.size() <= 1) return 0.0;  // empty-mean convention
    if (cfg.locally_weighted_mean) {
        double sigma = effective_sigma(cfg);
        auto zi = standardize(items_[index].context);
        double wsum = 0.0, acc = 0.0;
        for (std::size_t j = 0; j < items_.size(); ++j) {
            if (j == index) continue;
            double w = similarity(standardize(items_[j].context), zi, sigma);
            wsum += w;
            acc += w * items_[j].reward;
        }
        if (wsum > 1e-12) return acc / wsum;
        // all weights vanished: fall through to the global mean
    }
    double total = 0.0;
    for (const auto& e : items_) total += e.reward;
    return (total - items_[index].reward) / static_cast<double>(items_.size() - 1);
}

double ExperienceBuffer::surprisal(std::size_t index, const std::vector<double>& x_curr,
                                   const SelectionConfig& cfg) const {
    const Experience& e = items_.at(index);
    double sim = similarity(standardize(e.context), standardize(x_curr),
                            effective_sigma(cfg));
    return sim * std::abs(e.reward - loo_mean(index, cfg));
}

std::vector<SelectedExperience> ExperienceBuffer::select(const std::vector<double>& x_curr,
                                                         const SelectionConfig& cfg) const {
    std::vector<SelectedExperience> out;
    if (items_.empty() || cfg.m == 0) return out;
    double sigma = effective_sigma(cfg);
    std::size_t n = items_.size();

    std::vector<std::vector<double>> z;
    z.reserve(n);
    for (const auto& e : items_) z.push_back(standardize(e.context));
    auto z_curr = standardize(x_curr);

    std::vector<double> score(n), sim_curr(n);
    for (std::size_t i = 0; i < n; ++i) {
        sim_curr[i] = similarity(z[i], z_curr, sigma);
        score[i] = sim_curr[i] * std::abs(items_[i].reward - loo_mean(i, cfg));
    }

    // greedy max-marginal-gain: gain(i | S) = score_i - lambda * sum sim(i, s)
    std::vector<bool> taken(n, false);
    std::vector<double> penalty(n, 0.0);
    std::size_t want = std::min<std::size_t>(cfg.m, n);
    std::vector<std::size_t> chosen;
    for (std::size_t step = 0; step < want; ++step) {
        std::ptrdiff_t best = -1;
        double best_gain = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            double gain = score[i] - cfg.lambda_div * penalty[i];
            bool better =
                best < 0 || gain > best_gain ||
                (gain == best_gain &&
                 items_[i].round < items_[static_cast<std::size_t>(best)].round);
            if (better) {
                best = static_cast<std::ptrdiff_t>(i);
                best_gain = gain;
            }
        }
        auto b = static_cast<std::size_t>(best);
        taken[b] = true;
        chosen.push_back(b);
        for (std::size_t i = 0; i < n; ++i)
            if (!taken[i]) penalty[i] += similarity(z[i], z[b], sigma);
    }

    out.reserve(chosen.size());
    for (std::size_t i : chosen)
        out.push_back({items_[i], sim_curr[i], score[i]});
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.experience.reward != b.experience.reward)
            return a.experience.reward < b.experience.reward;
        return a.experience.round < b.experience.round;
    });
    return out;
}

namespace {

nlohmann::json action_to_json(const ScalingAction& a) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : a.stages)
        arr.push_back({{"replicas", s.replicas},
                       {"cpu_millicores", s.cpu_millicores},
                       {"memory_mb", s.memory_mb},
                       {"rate_ratio_tenths", s.rate_ratio_tenths}});
    return arr;
}

ScalingAction action_from_json(const nlohmann::json& arr) {
    ScalingAction a;
    for (const auto& s : arr) {
        StageDelta d;
        d.replicas = s.at("replicas").get<int>();
        d.cpu_millicores = s.at("cpu_millicores").get<int>();
        d.memory_mb = s.at("memory_mb").get<int>();
        d.rate_ratio_tenths = s.at("rate_ratio_tenths").get<int>();
        a.stages.push_back(d);
    }
    return a;
}

}  // namespace

void ExperienceBuffer::persist(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("experience store: cannot write " + path);
    for (const auto& e : items_) {
        nlohmann::json j{{"round", e.round},
                         {"source", e.source},
                         {"reward", e.reward},
                         {"context", e.context},
                         {"action", action_to_json(e.action)}};
        out << j.dump() << '\n';
    }
}

ExperienceBuffer ExperienceBuffer::load(const std::string& path, double r_min,
                                        std::size_t* corrupt_lines) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("experience store: cannot read " + path);
    ExperienceBuffer buf(r_min);
    std::size_t bad = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            Experience e;
            e.round = j.at("round").get<int>();
            e.source = j.at("source").get<std::string>();
            e.reward = j.at("reward").get<double>();
            e.context = j.at("context").get<std::vector<double>>();
            e.action = action_from_json(j.at("action"));
            buf.store(std::move(e));
        } catch (const nlohmann::json::exception&) {
            ++bad;
        }
    }
    if (corrupt_lines) *corrupt_lines = bad;
    return buf;
}

}  // namespace scalelab
