#include "scalelab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "httplib.h"

namespace scalelab {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double round_tenth(double v) { return std::round(v * 10.0) / 10.0; }

}  // namespace

ExplorationSchedule::ExplorationSchedule(double eps0, double decay, double floor)
    : eps_(eps0), decay_(decay), floor_(floor) {
    if (!(eps0 >= 0.0 && eps0 <= 1.0) || !(floor >= 0.0 && floor <= eps0) ||
        !(decay > 0.0 && decay <= 1.0))
        throw std::invalid_argument("exploration schedule: need 0 <= floor <= eps0 <= 1 "
                                    "and decay in (0, 1]");
}

ScalingAction random_probe(const PipelineState& state, Rng& rng, int* stage_out) {
    ScalingAction a = ScalingAction::noop(state.stages.size());
    int s = static_cast<int>(rng.uniform_int(state.stages.size()));
    StageDelta& d = a.stages[s];
    d.replicas = kReplicaDeltas[rng.uniform_int(kReplicaDeltas.size())];
    if (state.stages[s].kind == StageKind::Cpu) {
        d.cpu_millicores = kCpuDeltas[rng.uniform_int(kCpuDeltas.size())];
        d.memory_mb = kMemDeltas[rng.uniform_int(kMemDeltas.size())];
    } else {
        d.rate_ratio_tenths = kRateTenthDeltas[rng.uniform_int(kRateTenthDeltas.size())];
    }
    if (stage_out) *stage_out = s;
    return a;
}

RawAction to_raw(const ScalingAction& action) {
    RawAction raw;
    raw.stages.resize(action.stages.size());
    for (std::size_t i = 0; i < action.stages.size(); ++i) {
        raw.stages[i].replicas = action.stages[i].replicas;
        raw.stages[i].cpu_millicores = action.stages[i].cpu_millicores;
        raw.stages[i].memory_mb = action.stages[i].memory_mb;
        raw.stages[i].rate_ratio = action.stages[i].rate_ratio_tenths / 10.0;
    }
    return raw;
}

Decision decide(PolicyBackend& backend, const DecisionContext& ctx,
                ExplorationSchedule& schedule, Rng& rng) {
    Decision d;
    d.epsilon_used = schedule.value();
    if (rng.uniform() < d.epsilon_used) {
        d.source = "probe";
        d.probe_action = random_probe(*ctx.state, rng, &d.probe_stage);
    } else {
        d.source = backend.name();
        try {
            d.proposal = backend.propose(ctx);
        } catch (const std::exception& e) {
            d.proposal = nlohmann::json::object();
            d.backend_failed = true;
            d.log.push_back(std::string("backend '") + d.source + "' failed (" + e.what() +
                            "); executing no-op");
        }
    }
    schedule.advance();
    return d;
}

// ---- mock backend ---------------------------------------------------------

namespace {

double stage_util(const StageSnapshot& s) {
    return s.kind == StageKind::Gpu ? s.u_gpu_quota : s.u_cpu;
}

// Does a stored action move the same knob of the same stage in the same
// direction as the candidate?
bool same_move(const ScalingAction& stored, std::size_t stage, int dn, int dt) {
    if (stage >= stored.stages.size()) return false;
    const StageDelta& d = stored.stages[stage];
    if (dn != 0 && d.replicas * dn > 0) return true;
    if (dt != 0 && d.rate_ratio_tenths * dt > 0) return true;
    return false;
}

}  // namespace

nlohmann::json MockBackend::propose(const DecisionContext& ctx) {
    const PipelineState& st = *ctx.state;
    if (st.stages.empty()) return nlohmann::json::object();

    std::size_t argmax = 0, argmin = 0;
    for (std::size_t i = 1; i < st.stages.size(); ++i) {
        if (stage_util(st.stages[i]) > stage_util(st.stages[argmax])) argmax = i;
        if (stage_util(st.stages[i]) < stage_util(st.stages[argmin])) argmin = i;
    }
    double u_max = stage_util(st.stages[argmax]);

    std::size_t stage = 0;
    int dn = 0, dt = 0;  // candidate replica / rate-tenth direction
    if (u_max > thresholds_.scale_up_util || st.latency_p99_ms > ctx.t_sla_ms) {
        stage = argmax;
        const StageSnapshot& s = st.stages[stage];
        if (s.kind == StageKind::Gpu &&
            std::llround(s.config.rate_ratio * 10.0) < 10)
            dt = 1;
        else
            dn = 1;
    } else if (u_max < thresholds_.scale_down_util &&
               st.latency_p99_ms < thresholds_.scale_down_latency_frac * ctx.t_sla_ms) {
        stage = argmin;
        const StageSnapshot& s = st.stages[stage];
        if (s.kind == StageKind::Gpu &&
            std::llround(s.config.rate_ratio * 10.0) > ctx.limits.rate_min_tenths)
            dt = -1;
        else
            dn = -1;
    } else {
        return nlohmann::json::object();
    }

    // veto: a near-identical past state where this same move went badly
    if (ctx.buffer && !ctx.buffer->empty()) {
        std::vector<double> z_cur = ctx.buffer->standardize(context_features(st));
        double sigma = ctx.buffer->effective_sigma(ctx.selection);
        double best_sim = -1.0;
        const Experience* best = nullptr;
        for (const auto& e : ctx.buffer->all()) {
            if (e.context.size() != z_cur.size()) continue;
            double s = similarity(ctx.buffer->standardize(e.context), z_cur, sigma);
            if (s > best_sim) {
                best_sim = s;
                best = &e;
            }
        }
        if (best && best_sim > thresholds_.veto_similarity && best->reward < 0.0 &&
            same_move(best->action, stage, dn, dt))
            return nlohmann::json::object();
    }

    const StageSnapshot& s = st.stages[stage];
    nlohmann::json out = nlohmann::json::object();
    nlohmann::json entry;
    if (dt != 0) {
        entry["action"] = "adjust_rate";
        entry["rate_ratio"] =
            round_tenth((std::llround(s.config.rate_ratio * 10.0) + dt) / 10.0);
    } else {
        entry["action"] = "scale_replicas";
        entry["replicas"] = s.config.replicas + dn;
    }
    out[s.name] = std::move(entry);
    return out;
}

// ---- prompt assembly ------------------------------------------------------

namespace {

const char* action_name(const StageDelta& d, StageKind kind) {
    if (kind == StageKind::Gpu) {
        if (d.rate_ratio_tenths != 0 && d.replicas != 0) return "scale_both";
        if (d.rate_ratio_tenths != 0) return "adjust_rate";
        if (d.replicas != 0) return "scale_replicas";
        return "none";
    }
    bool res = d.cpu_millicores != 0 || d.memory_mb != 0;
    if (d.replicas != 0 && res) return "scale_both";
    if (d.replicas != 0) return "scale_replicas";
    if (res) return "scale_resources";
    return "none";
}

struct ContextView {
    // per-stage slices of the flat feature vector
    double n(std::size_t i) const { return x[7 * i + 0]; }
    double cpu(std::size_t i) const { return x[7 * i + 1]; }
    double mem(std::size_t i) const { return x[7 * i + 2]; }
    double rho(std::size_t i) const { return x[7 * i + 3]; }
    double queue(std::size_t i) const { return x[7 * i + 4]; }
    double u_cpu(std::size_t i) const { return x[7 * i + 5]; }
    double u_gpu(std::size_t i) const { return x[7 * i + 6]; }
    double p99() const { return x[x.size() - 2]; }
    const std::vector<double>& x;
};

}  // namespace

std::string render_episode(const Experience& e,
                           const std::vector<StageSnapshot>& stages) {
    if (e.context.size() != stages.size() * 7 + 2)
        throw std::invalid_argument("render_episode: context does not match pipeline shape");
    ContextView v{e.context};
    std::string s = "Episode (Reward: " + fmt("%+.2f", e.reward) +
                    (e.reward > 0.0 ? " GOOD" : " BAD") + "):\nInput:\n";
    for (std::size_t i = 0; i < stages.size(); ++i) {
        s += "  " + stages[i].name + ": replicas=" + fmt("%.0f", v.n(i)) +
             ", queue=" + fmt("%.0f", v.queue(i)) + "\n";
        if (stages[i].kind == StageKind::Gpu)
            s += "    GPU_usage=" + fmt("%.1f", 100.0 * v.u_gpu(i)) + "\n";
        else
            s += "    CPU_usage=" + fmt("%.1f", 100.0 * v.u_cpu(i)) + "\n";
    }
    s += "  E2E Latency: p99=" + fmt("%.0f", v.p99()) + "ms\nPrediction:\n";

    ordered_json pred;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const StageDelta d =
            i < e.action.stages.size() ? e.action.stages[i] : StageDelta{};
        ordered_json entry;
        entry["action"] = action_name(d, stages[i].kind);
        if (stages[i].kind == StageKind::Gpu) {
            if (d.replicas != 0)
                entry["replicas"] = static_cast<int>(v.n(i)) + d.replicas;
            if (d.rate_ratio_tenths != 0)
                entry["rate_ratio"] = round_tenth(v.rho(i) + d.rate_ratio_tenths / 10.0);
        } else {
            if (d.replicas != 0)
                entry["replicas"] = static_cast<int>(v.n(i)) + d.replicas;
            if (d.cpu_millicores != 0)
                entry["cpu_millicores"] = static_cast<int>(v.cpu(i)) + d.cpu_millicores;
            if (d.memory_mb != 0)
                entry["memory_mb"] = static_cast<int>(v.mem(i)) + d.memory_mb;
        }
        pred[stages[i].name] = std::move(entry);
    }
    s += "  " + pred.dump() + "\nReward: " + fmt("%+.2f", e.reward) + "\n";
    return s;
}

namespace {

std::string render_current(const PipelineState& st, double t_sla_ms) {
    std::string s = "Current state:\n";
    for (const auto& stage : st.stages) {
        s += "  " + stage.name + ": replicas=" + std::to_string(stage.config.replicas) +
             ", queue=" + fmt("%.0f", stage.queue_depth) + "\n";
        if (stage.kind == StageKind::Gpu)
            s += "    GPU_usage=" + fmt("%.1f", 100.0 * stage.u_gpu_quota) +
                 ", rate_ratio=" + fmt("%.1f", stage.config.rate_ratio) + "\n";
        else
            s += "    CPU_usage=" + fmt("%.1f", 100.0 * stage.u_cpu) +
                 ", cpu=" + std::to_string(stage.config.cpu_millicores) + "m, memory=" +
                 std::to_string(stage.config.memory_mb) + "MB\n";
    }
    s += "  E2E Latency: p99=" + fmt("%.0f", st.latency_p99_ms) + "ms\n";
    s += "  Throughput: " + fmt("%.1f", st.throughput_rps) + " req/s\n";
    s += "  Latency target: p99 <= " + fmt("%.0f", t_sla_ms) + "ms\n";
    return s;
}

std::string render_constraints(const DecisionContext& ctx) {
    const ValidatorConfig& lim = ctx.limits;
    std::string s = "Physical limits:\n";
    s += "- Replicas per stage: between " + std::to_string(lim.n_min) + " and " +
         std::to_string(lim.n_max) + "; change by -1, +1, or +2 per decision.\n";
    s += "- CPU per replica: steps of " + std::to_string(kCpuStepMillicores) +
         " millicores, never below " + std::to_string(lim.cpu_floor_millicores) +
         "; at most one step per decision.\n";
    s += "- Memory per replica: steps of " + std::to_string(kMemStepMb) +
         " MB, never below " + std::to_string(lim.memory_floor_mb) +
         "; at most one step per decision.\n";
    s += "- GPU admission ratio: tenths from " + fmt("%.1f", lim.rate_min_tenths / 10.0) +
         " to 1.0; change by -0.1, +0.1, or +0.2 per decision.\n";
    s += "- After raising replicas a stage rests " + fmt("%g", ctx.limits.cooldown_up_s) +
         "s; after lowering, " + fmt("%g", ctx.limits.cooldown_down_s) + "s.\n";
    s += "- Cost budget: $" + fmt("%.2f", ctx.c_budget_per_hour) +
         "/hour across the pipeline.\n";
    s += "Guidance:\n";
    s += "- Allocations are listed in the current state; avoid cutting any resource by "
         "more than half in one decision.\n";
    s += "- High p99 with low utilization means a queue built up earlier and drained "
         "slowly; prefer adding capacity over shrinking.\n";
    s += "- Treat p99 above the target as the primary failure signal.\n";
    s += "Goals:\n";
    s += "- Keep p99 at or below the target first; lower cost second.\n";
    s += "- Use the episodes: repeat moves that earned positive reward in similar "
         "states, avoid moves that earned negative reward.\n";
    return s;
}

std::string render_schema(const PipelineState& st) {
    std::string s = "Reply with exactly one JSON object keyed by stage name, no prose. "
                    "All values are absolute targets, not deltas:\n{";
    for (std::size_t i = 0; i < st.stages.size(); ++i) {
        if (i) s += ",\n ";
        s += "\"" + st.stages[i].name + "\": ";
        if (st.stages[i].kind == StageKind::Gpu)
            s += "{\"action\": \"adjust_rate\"|\"scale_replicas\"|\"scale_both\"|\"none\", "
                 "\"replicas\": <int>, \"rate_ratio\": <float in [0,1]>}";
        else
            s += "{\"action\": \"scale_replicas\"|\"scale_resources\"|\"scale_both\"|"
                 "\"none\", \"replicas\": <int>, \"cpu_millicores\": <int>, "
                 "\"memory_mb\": <int>}";
    }
    s += "}\n";
    return s;
}

}  // namespace

std::string PromptBundle::full_text() const {
    std::string s = constraints + "\n";
    if (!episodes.empty()) s += "Past episodes, worst to best:\n\n" + episodes;
    s += "\n" + current_input + "\n" + schema;
    return s;
}

std::size_t PromptBundle::estimated_tokens(double chars_per_token) const {
    return static_cast<std::size_t>(
        std::ceil(static_cast<double>(full_text().size()) / chars_per_token));
}

PromptBundle build_prompt(const PipelineState& state,
                          std::vector<SelectedExperience> selected,
                          const DecisionContext& ctx, const PromptConfig& cfg) {
    std::stable_sort(selected.begin(), selected.end(),
                     [](const SelectedExperience& a, const SelectedExperience& b) {
                         if (a.experience.reward != b.experience.reward)
                             return a.experience.reward < b.experience.reward;
                         return a.experience.round < b.experience.round;
                     });
    PromptBundle bundle;
    bundle.current_input = render_current(state, ctx.t_sla_ms);
    bundle.constraints = render_constraints(ctx);
    bundle.schema = render_schema(state);

    auto render_all = [&](std::size_t skip) {
        std::string s;
        for (std::size_t i = skip; i < selected.size(); ++i)
            s += render_episode(selected[i].experience, state.stages) + "\n";
        return s;
    };
    std::size_t skip = 0;
    bundle.episodes = render_all(skip);
    while (skip < selected.size() && bundle.estimated_tokens(cfg.chars_per_token) >
                                         cfg.token_budget) {
        ++skip;  // lowest-reward episodes go first
        bundle.episodes = render_all(skip);
    }
    bundle.dropped_episodes = static_cast<int>(skip);
    return bundle;
}

// ---- JSON-over-HTTP backend ----------------------------------------------

void coerce_numeric_strings(nlohmann::json& j) {
    if (j.is_object() || j.is_array()) {
        for (auto& v : j) coerce_numeric_strings(v);
        return;
    }
    if (!j.is_string()) return;
    const std::string s = j.get<std::string>();
    if (s.empty()) return;
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos == s.size() && std::isfinite(v)) j = v;
    } catch (const std::exception&) {
        // not numeric; leave the string alone
    }
}

nlohmann::json parse_action_text(const std::string& text) {
    auto try_parse = [](const std::string& s) -> nlohmann::json {
        auto j = nlohmann::json::parse(s, nullptr, false);
        return j.is_object() ? j : nlohmann::json();
    };
    if (auto j = try_parse(text); j.is_object()) return j;

    // fenced block, with or without a language tag
    std::size_t fence = text.find("```");
    if (fence != std::string::npos) {
        std::size_t start = text.find('\n', fence);
        std::size_t end = text.find("```", fence + 3);
        if (start != std::string::npos && end != std::string::npos && start < end) {
            if (auto j = try_parse(text.substr(start + 1, end - start - 1)); j.is_object())
                return j;
        }
    }

    // widest brace-delimited span
    std::size_t first = text.find('{');
    std::size_t last = text.rfind('}');
    if (first != std::string::npos && last != std::string::npos && first < last) {
        if (auto j = try_parse(text.substr(first, last - first + 1)); j.is_object())
            return j;
    }
    throw std::runtime_error("reply contains no parseable JSON object");
}

LlmConfig LlmConfig::from_env() {
    LlmConfig cfg;
    if (const char* v = std::getenv("SCALELAB_LLM_ENDPOINT")) cfg.endpoint = v;
    if (const char* v = std::getenv("SCALELAB_LLM_MODEL")) cfg.model = v;
    if (const char* v = std::getenv("SCALELAB_LLM_API_KEY")) cfg.api_key = v;
    return cfg;
}

HttpLlmBackend::HttpLlmBackend(LlmConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.endpoint.empty())
        throw std::invalid_argument("llm backend: endpoint not configured");
}

std::string HttpLlmBackend::post_chat(
    const std::vector<std::pair<std::string, std::string>>& messages) {
    httplib::Client cli(cfg_.endpoint);
    cli.set_connection_timeout(cfg_.timeout_s, 0);
    cli.set_read_timeout(cfg_.timeout_s, 0);
    cli.set_write_timeout(cfg_.timeout_s, 0);
    httplib::Headers headers;
    if (!cfg_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + cfg_.api_key);

    nlohmann::json body;
    body["model"] = cfg_.model;
    body["temperature"] = cfg_.temperature;
    body["messages"] = nlohmann::json::array();
    for (const auto& [role, content] : messages)
        body["messages"].push_back({{"role", role}, {"content", content}});

    ++calls_;
    auto res = cli.Post(cfg_.path, headers, body.dump(), "application/json");
    if (!res)
        throw std::runtime_error("llm http error: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw std::runtime_error("llm http status " + std::to_string(res->status));
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded())
        throw std::runtime_error("llm reply body is not valid JSON");
    if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty() ||
        !parsed["choices"][0].contains("message") ||
        !parsed["choices"][0]["message"].contains("content") ||
        !parsed["choices"][0]["message"]["content"].is_string())
        throw std::runtime_error("llm reply missing choices[0].message.content");
    return parsed["choices"][0]["message"]["content"].get<std::string>();
}

void HttpLlmBackend::dump_artifact(int round, const char* kind,
                                   const std::string& text) const {
    if (cfg_.artifact_dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(cfg_.artifact_dir, ec);
    char name[64];
    std::snprintf(name, sizeof name, "round_%04d_%s.txt", round, kind);
    std::ofstream(std::filesystem::path(cfg_.artifact_dir) / name) << text;
}

nlohmann::json HttpLlmBackend::propose(const DecisionContext& ctx) {
    static const std::vector<SelectedExperience> kNone;
    PromptBundle bundle = build_prompt(*ctx.state, ctx.retrieved ? *ctx.retrieved : kNone,
                                       ctx, cfg_.prompt);
    const std::string prompt = bundle.full_text();
    dump_artifact(ctx.round, "prompt", prompt);
    std::string reply = post_chat({{"user", prompt}});
    dump_artifact(ctx.round, "response", reply);

    nlohmann::json action;
    try {
        action = parse_action_text(reply);
    } catch (const std::exception& e) {
        std::string hint = std::string("The previous reply could not be used (") +
                           e.what() +
                           "). Respond with exactly one JSON object in the requested "
                           "schema and nothing else.";
        std::string second =
            post_chat({{"user", prompt}, {"assistant", reply}, {"user", hint}});
        dump_artifact(ctx.round, "response_retry", second);
        action = parse_action_text(second);  // still bad: caller falls back to no-op
    }
    coerce_numeric_strings(action);
    return action;
}

}  // namespace scalelab
