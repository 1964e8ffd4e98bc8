#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "scalelab/action.hpp"
#include "scalelab/experience.hpp"
#include "scalelab/rng.hpp"
#include "scalelab/types.hpp"
#include "scalelab/validator.hpp"

namespace scalelab {

// Geometric exploration decay with a floor. advance() is called exactly once
// per decision round.
class ExplorationSchedule {
public:
    explicit ExplorationSchedule(double eps0 = 0.15, double decay = 0.95,
                                 double floor = 0.05);
    double value() const { return eps_; }
    void advance() { eps_ = std::max(floor_, eps_ * decay_); }

private:
    double eps_;
    double decay_;
    double floor_;
};

// Everything a decision backend may look at for one round. Raw pointers are
// borrowed from the caller for the duration of propose().
struct DecisionContext {
    const PipelineState* state = nullptr;
    const std::vector<SelectedExperience>* retrieved = nullptr;
    const ExperienceBuffer* buffer = nullptr;  // full store, for veto lookups
    SelectionConfig selection;
    ValidatorConfig limits;
    double t_sla_ms = 500.0;
    double c_budget_per_hour = 10.0;
    int round = 0;
};

// A backend proposes absolute per-stage targets as JSON keyed by stage name.
// It may throw; the caller turns failures into a no-op.
class PolicyBackend {
public:
    virtual ~PolicyBackend() = default;
    virtual nlohmann::json propose(const DecisionContext& ctx) = 0;
    virtual std::string name() const = 0;
};

struct Decision {
    nlohmann::json proposal;  // absolute targets ({} = no-op); empty for probes
    ScalingAction probe_action;  // grid deltas; only meaningful when is_probe()
    int probe_stage = -1;        // stage a probe perturbs
    std::string source;          // "probe" or the backend's name
    bool backend_failed = false;
    double epsilon_used = 0.0;  // exploration probability in force this round
    std::vector<std::string> log;

    bool is_probe() const { return source == "probe"; }
};

// Uniform single-stage perturbation: pick a stage uniformly, then each of its
// knobs uniformly over the per-step grid (the all-zero combination included).
ScalingAction random_probe(const PipelineState& state, Rng& rng, int* stage_out = nullptr);

// Convert grid deltas into the raw-delta form the validator takes, so probes
// and backend proposals share one execution path.
RawAction to_raw(const ScalingAction& action);

// One round of the explore/exploit split: with probability eps a random
// probe, otherwise the backend (exceptions become a logged no-op). Decays the
// schedule exactly once.
Decision decide(PolicyBackend& backend, const DecisionContext& ctx,
                ExplorationSchedule& schedule, Rng& rng);

struct MockThresholds {
    double scale_up_util = 0.8;
    double scale_down_util = 0.3;
    double scale_down_latency_frac = 0.5;  // of the latency target
    double veto_similarity = 0.9;
};

// Deterministic utilization-driven stand-in backend. Scales up the most
// loaded stage under pressure, down the least loaded one when everything is
// idle, and consults the store to veto moves that previously earned negative
// reward in a near-identical context.
class MockBackend : public PolicyBackend {
public:
    explicit MockBackend(MockThresholds t = {}) : thresholds_(t) {}
    nlohmann::json propose(const DecisionContext& ctx) override;
    std::string name() const override { return "mock"; }

private:
    MockThresholds thresholds_;
};

// ---- prompt assembly ------------------------------------------------------

struct PromptConfig {
    std::size_t token_budget = 8192;
    double chars_per_token = 4.0;
};

struct PromptBundle {
    std::string episodes;       // past decisions with outcomes, reward-ascending
    std::string current_input;  // live per-stage metrics
    std::string constraints;    // limits and guidance, rendered from config
    std::string schema;         // reply-shape instructions
    int dropped_episodes = 0;   // trimmed to fit the token budget

    std::string full_text() const;
    std::size_t estimated_tokens(double chars_per_token) const;
};

// Render one stored episode in the fixed fenceless text layout the backend
// is prompted with. Stage names/kinds come from the live pipeline.
std::string render_episode(const Experience& e, const std::vector<StageSnapshot>& stages);

PromptBundle build_prompt(const PipelineState& state,
                          std::vector<SelectedExperience> selected,
                          const DecisionContext& ctx, const PromptConfig& cfg = {});

// ---- JSON-over-HTTP backend ----------------------------------------------

struct LlmConfig {
    std::string endpoint;  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key;
    double temperature = 1.0;
    int timeout_s = 10;
    std::string artifact_dir;  // when set, prompt/response dumped per round
    PromptConfig prompt;

    // Reads SCALELAB_LLM_ENDPOINT / SCALELAB_LLM_MODEL / SCALELAB_LLM_API_KEY.
    static LlmConfig from_env();
};

// In-place cleanup of a parsed reply: numeric strings like "3" become
// numbers so lenient replies survive the later per-field checks.
void coerce_numeric_strings(nlohmann::json& j);

// Extract the first JSON object from free-form reply text (handles code
// fences and surrounding chatter). Throws std::runtime_error when no object
// parses.
nlohmann::json parse_action_text(const std::string& text);

class HttpLlmBackend : public PolicyBackend {
public:
    explicit HttpLlmBackend(LlmConfig cfg);
    nlohmann::json propose(const DecisionContext& ctx) override;
    std::string name() const override { return "llm"; }

    // Exposed for tests: number of HTTP calls made so far.
    int calls() const { return calls_; }

private:
    std::string post_chat(const std::vector<std::pair<std::string, std::string>>& messages);
    void dump_artifact(int round, const char* kind, const std::string& text) const;

    LlmConfig cfg_;
    int calls_ = 0;
};

}  // namespace scalelab
