#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <atomic>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "scalelab/policy.hpp"

using namespace scalelab;
using nlohmann::json;

namespace {

PipelineState pipeline3(double u0 = 0.5, double u1 = 0.5, double u2 = 0.5,
                        double p99 = 300.0) {
    PipelineState st;
    st.stages.resize(3);
    st.stages[0].name = "preprocessing";
    st.stages[0].kind = StageKind::Cpu;
    st.stages[0].config = {2, 1000, 1024, 1.0};
    st.stages[0].u_cpu = u0;
    st.stages[1].name = "inference";
    st.stages[1].kind = StageKind::Gpu;
    st.stages[1].config = {1, 1000, 1024, 0.5};
    st.stages[1].u_gpu_quota = u1;
    st.stages[2].name = "postprocessing";
    st.stages[2].kind = StageKind::Cpu;
    st.stages[2].config = {2, 1000, 1024, 1.0};
    st.stages[2].u_cpu = u2;
    st.latency_p99_ms = p99;
    st.throughput_rps = 11.5;
    return st;
}

DecisionContext ctx_for(const PipelineState& st) {
    DecisionContext ctx;
    ctx.state = &st;
    return ctx;
}

class ThrowingBackend : public PolicyBackend {
public:
    json propose(const DecisionContext&) override {
        throw std::runtime_error("deliberate failure");
    }
    std::string name() const override { return "mock"; }
};

}  // namespace

TEST_CASE("exploration schedule decays geometrically onto its floor") {
    ExplorationSchedule s;
    CHECK(s.value() == doctest::Approx(0.15));
    s.advance();
    CHECK(s.value() == doctest::Approx(0.1425).epsilon(1e-12));
    ExplorationSchedule t;
    for (int i = 0; i < 21; ++i) t.advance();
    CHECK(t.value() > 0.05);
    t.advance();  // 22nd decay crosses the floor
    CHECK(t.value() == 0.05);
    for (int i = 0; i < 100; ++i) t.advance();
    CHECK(t.value() == 0.05);
    CHECK_THROWS_AS(ExplorationSchedule(0.1, 0.95, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(ExplorationSchedule(0.1, 1.5, 0.05), std::invalid_argument);
}

TEST_CASE("forced exploration probes a uniformly random stage") {
    auto st = pipeline3();
    auto ctx = ctx_for(st);
    MockBackend backend;
    ExplorationSchedule always(1.0, 1.0, 1.0);
    Rng rng(7);
    const int rounds = 10000;
    std::array<int, 3> stage_count{};
    for (int i = 0; i < rounds; ++i) {
        Decision d = decide(backend, ctx, always, rng);
        REQUIRE(d.is_probe());
        REQUIRE(d.probe_stage >= 0);
        REQUIRE(d.probe_stage < 3);
        ++stage_count[d.probe_stage];
        // probes never touch knobs the stage kind lacks
        for (std::size_t k = 0; k < 3; ++k) {
            const StageDelta& delta = d.probe_action.stages[k];
            if (static_cast<int>(k) != d.probe_stage) CHECK(delta.is_noop());
            if (st.stages[k].kind == StageKind::Gpu) {
                CHECK(delta.cpu_millicores == 0);
                CHECK(delta.memory_mb == 0);
            } else {
                CHECK(delta.rate_ratio_tenths == 0);
            }
        }
    }
    for (int c : stage_count)
        CHECK(std::abs(c / double(rounds) - 1.0 / 3.0) < 0.03);
}

TEST_CASE("probe frequency tracks a fixed epsilon") {
    auto st = pipeline3();
    auto ctx = ctx_for(st);
    MockBackend backend;
    ExplorationSchedule half(0.5, 1.0, 0.05);
    Rng rng(11);
    int probes = 0;
    const int rounds = 10000;
    for (int i = 0; i < rounds; ++i)
        if (decide(backend, ctx, half, rng).is_probe()) ++probes;
    CHECK(std::abs(probes / double(rounds) - 0.5) < 0.02);

    ExplorationSchedule never(0.0, 1.0, 0.0);
    for (int i = 0; i < 200; ++i)
        CHECK_FALSE(decide(backend, ctx, never, rng).is_probe());
}

TEST_CASE("backend exceptions degrade to a logged no-op") {
    auto st = pipeline3();
    auto ctx = ctx_for(st);
    ThrowingBackend backend;
    ExplorationSchedule never(0.0, 1.0, 0.0);
    Rng rng(3);
    Decision d = decide(backend, ctx, never, rng);
    CHECK_FALSE(d.is_probe());
    CHECK(d.backend_failed);
    CHECK(d.log.size() == 1);
    CHECK(d.proposal.is_object());
    CHECK(d.proposal.empty());
    CooldownState cd(3);
    auto act = validate(absolute_to_delta(d.proposal, st), st, cd, 0.0);
    CHECK(act.is_noop());
}

TEST_CASE("mock backend: pressure scales up the hottest stage") {
    MockBackend mock;
    auto st = pipeline3(0.9, 0.4, 0.3);
    st.stages[0].u_cpu = 0.9;
    auto ctx = ctx_for(st);
    json p = mock.propose(ctx);
    REQUIRE(p.contains("preprocessing"));
    CHECK(p["preprocessing"]["action"] == "scale_replicas");
    CHECK(p["preprocessing"]["replicas"] == 3);
    CHECK(p.size() == 1);

    // latency breach alone is enough, even with moderate utilization
    auto late = pipeline3(0.6, 0.5, 0.5, 620.0);
    auto lctx = ctx_for(late);
    json q = mock.propose(lctx);
    CHECK(q.contains("preprocessing"));  // argmax utilization stage

    // in-between load, healthy latency: leave it alone
    auto calm = pipeline3(0.5, 0.6, 0.55, 300.0);
    auto cctx = ctx_for(calm);
    CHECK(mock.propose(cctx).empty());
}

TEST_CASE("mock backend: GPU pressure raises the admission ratio before replicas") {
    MockBackend mock;
    auto st = pipeline3(0.4, 0.95, 0.3);
    auto ctx = ctx_for(st);
    json p = mock.propose(ctx);
    REQUIRE(p.contains("inference"));
    CHECK(p["inference"]["action"] == "adjust_rate");
    CHECK(p["inference"]["rate_ratio"].get<double>() == doctest::Approx(0.6));

    st.stages[1].config.rate_ratio = 1.0;  // ratio exhausted: replicas next
    json q = mock.propose(ctx);
    CHECK(q["inference"]["action"] == "scale_replicas");
    CHECK(q["inference"]["replicas"] == 2);
}

TEST_CASE("mock backend: idle pipeline scales down the coolest stage") {
    MockBackend mock;
    auto st = pipeline3(0.1, 0.25, 0.2, 100.0);
    auto ctx = ctx_for(st);
    json p = mock.propose(ctx);
    REQUIRE(p.contains("preprocessing"));
    CHECK(p["preprocessing"]["action"] == "scale_replicas");
    CHECK(p["preprocessing"]["replicas"] == 1);

    // GPU argmin prefers easing the ratio; at the ratio floor it sheds a replica
    auto st2 = pipeline3(0.25, 0.05, 0.2, 100.0);
    auto ctx2 = ctx_for(st2);
    json q = mock.propose(ctx2);
    CHECK(q["inference"]["action"] == "adjust_rate");
    CHECK(q["inference"]["rate_ratio"].get<double>() == doctest::Approx(0.4));
    st2.stages[1].config.rate_ratio = 0.1;
    st2.stages[1].config.replicas = 2;
    json r = mock.propose(ctx2);
    CHECK(r["inference"]["action"] == "scale_replicas");
    CHECK(r["inference"]["replicas"] == 1);

    // borderline latency blocks the scale-down
    auto st3 = pipeline3(0.1, 0.25, 0.2, 260.0);
    auto ctx3 = ctx_for(st3);
    CHECK(mock.propose(ctx3).empty());
}

TEST_CASE("mock backend: a burned near-identical experience vetoes the move") {
    MockBackend mock;
    auto st = pipeline3(0.9, 0.4, 0.3);
    auto ctx = ctx_for(st);

    ExperienceBuffer burned(-10.0);
    Experience e;
    e.context = context_features(st);
    e.reward = -0.5;
    e.round = 4;
    e.action = ScalingAction::noop(3);
    e.action.stages[0].replicas = 1;  // the exact move the mock wants
    burned.store(e);
    ctx.buffer = &burned;
    CHECK(mock.propose(ctx).empty());

    // same state, opposite recorded direction: no veto
    ExperienceBuffer other(-10.0);
    e.action.stages[0].replicas = -1;
    other.store(e);
    ctx.buffer = &other;
    CHECK(mock.propose(ctx).contains("preprocessing"));

    // positive outcome never vetoes
    ExperienceBuffer good(-10.0);
    e.action.stages[0].replicas = 1;
    e.reward = 0.6;
    good.store(e);
    ctx.buffer = &good;
    CHECK(mock.propose(ctx).contains("preprocessing"));

    // determinism
    ctx.buffer = &burned;
    CHECK(mock.propose(ctx) == mock.propose(ctx));
}

TEST_CASE("episode rendering matches the frozen template") {
    std::vector<StageSnapshot> stages(2);
    stages[0].name = "preprocessing";
    stages[0].kind = StageKind::Cpu;
    stages[1].name = "inference";
    stages[1].kind = StageKind::Gpu;

    Experience e;
    e.context = {2, 1000, 1024, 1.0, 15, 0.783, 0.0,
                 1, 1000, 1024, 0.5, 3,  0.0,   0.452,
                 342, 11.5};
    e.reward = 0.85;
    e.action = ScalingAction::noop(2);
    e.action.stages[0].replicas = 1;

    const std::string expected =
        "Episode (Reward: +0.85 GOOD):\n"
        "Input:\n"
        "  preprocessing: replicas=2, queue=15\n"
        "    CPU_usage=78.3\n"
        "  inference: replicas=1, queue=3\n"
        "    GPU_usage=45.2\n"
        "  E2E Latency: p99=342ms\n"
        "Prediction:\n"
        "  {\"preprocessing\":{\"action\":\"scale_replicas\",\"replicas\":3},"
        "\"inference\":{\"action\":\"none\"}}\n"
        "Reward: +0.85\n";
    CHECK(render_episode(e, stages) == expected);

    Experience bad = e;
    bad.reward = -0.4;
    CHECK(render_episode(bad, stages).find("(Reward: -0.40 BAD)") != std::string::npos);

    bad.context.pop_back();
    CHECK_THROWS_AS(render_episode(bad, stages), std::invalid_argument);
}

TEST_CASE("prompt assembly: curriculum order, zero-shot, budget trimming") {
    auto st = pipeline3();
    auto ctx = ctx_for(st);
    auto exp_with = [&](double reward, int round) {
        SelectedExperience s;
        s.experience.context = context_features(st);
        s.experience.reward = reward;
        s.experience.round = round;
        s.experience.action = ScalingAction::noop(3);
        s.experience.action.stages[round % 3].replicas = 1;
        return s;
    };
    std::vector<SelectedExperience> sel{exp_with(0.9, 1), exp_with(0.3, 2),
                                        exp_with(0.6, 3)};

    PromptConfig roomy;
    roomy.token_budget = 1 << 20;
    PromptBundle full = build_prompt(st, sel, ctx, roomy);
    CHECK(full.dropped_episodes == 0);
    auto p03 = full.episodes.find("+0.30");
    auto p06 = full.episodes.find("+0.60");
    auto p09 = full.episodes.find("+0.90");
    REQUIRE(p03 != std::string::npos);
    REQUIRE(p06 != std::string::npos);
    REQUIRE(p09 != std::string::npos);
    CHECK(p03 < p06);
    CHECK(p06 < p09);
    CHECK(full.full_text().find("Current state:") != std::string::npos);
    CHECK(full.full_text().find("Physical limits:") != std::string::npos);
    CHECK(build_prompt(st, sel, ctx, roomy).full_text() == full.full_text());

    PromptBundle zero = build_prompt(st, {}, ctx, roomy);
    CHECK(zero.episodes.empty());
    CHECK(zero.dropped_episodes == 0);
    CHECK(zero.full_text().find("Episode (") == std::string::npos);
    CHECK(zero.full_text().find("Current state:") != std::string::npos);

    PromptConfig tight;
    tight.token_budget = full.estimated_tokens(tight.chars_per_token) - 1;
    PromptBundle trimmed = build_prompt(st, sel, ctx, tight);
    CHECK(trimmed.dropped_episodes >= 1);
    CHECK(trimmed.episodes.find("+0.30") == std::string::npos);  // worst goes first
    CHECK(trimmed.episodes.find("+0.90") != std::string::npos);
    CHECK(trimmed.estimated_tokens(tight.chars_per_token) <= tight.token_budget);
}

TEST_CASE("reply text parsing: fences, chatter, junk, numeric strings") {
    const char* plain = R"({"preprocessing": {"action": "none"}})";
    CHECK(parse_action_text(plain)["preprocessing"]["action"] == "none");

    std::string fenced = "Sure, here is the action:\n```json\n" + std::string(plain) +
                         "\n```\nLet me know if you need more.";
    CHECK(parse_action_text(fenced) == parse_action_text(plain));

    std::string bare_fence = "```\n" + std::string(plain) + "\n```";
    CHECK(parse_action_text(bare_fence) == parse_action_text(plain));

    std::string chatter = "I recommend the following.\n" + std::string(plain) + "\nDone.";
    CHECK(parse_action_text(chatter) == parse_action_text(plain));

    CHECK_THROWS_AS(parse_action_text("scale everything up!!"), std::runtime_error);
    CHECK_THROWS_AS(parse_action_text("[1, 2, 3]"), std::runtime_error);

    json j = json::parse(R"({"a": {"replicas": "3", "note": "big", "rate": "0.5x"}})");
    coerce_numeric_strings(j);
    CHECK(j["a"]["replicas"] == 3.0);
    CHECK(j["a"]["note"] == "big");   // non-numeric strings survive
    CHECK(j["a"]["rate"] == "0.5x");  // trailing junk means not a number
}

namespace {

// Minimal chat-completion stand-in serving scripted replies.
struct FakeLlm {
    httplib::Server svr;
    std::thread th;
    int port = 0;
    std::vector<std::string> replies;
    std::atomic<int> hits{0};
    std::mutex mu;
    std::string last_auth;
    std::string last_body;

    FakeLlm() {
        svr.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                     int i = hits++;
                     {
                         std::lock_guard<std::mutex> lock(mu);
                         last_auth = req.get_header_value("Authorization");
                         last_body = req.body;
                     }
                     std::string content = "{}";
                     if (!replies.empty())
                         content = replies[std::min<std::size_t>(i, replies.size() - 1)];
                     json msg{{"role", "assistant"}, {"content", content}};
                     json choice{{"message", msg}};
                     json out;
                     out["choices"] = json::array({choice});
                     res.set_content(out.dump(), "application/json");
                 });
        port = svr.bind_to_any_port("127.0.0.1");
        th = std::thread([this] { svr.listen_after_bind(); });
        svr.wait_until_ready();
    }
    ~FakeLlm() {
        svr.stop();
        th.join();
    }

    LlmConfig config() const {
        LlmConfig cfg;
        cfg.endpoint = "http://127.0.0.1:" + std::to_string(port);
        cfg.model = "test-model";
        cfg.api_key = "testkey";
        cfg.timeout_s = 5;
        return cfg;
    }
};

}  // namespace

TEST_CASE("http backend round trip with a scripted server") {
    FakeLlm server;
    server.replies = {R"({"preprocessing": {"action": "scale_replicas", "replicas": 3},
                          "inference": {"action": "adjust_rate", "rate_ratio": "0.6"}})"};
    HttpLlmBackend backend(server.config());
    auto st = pipeline3();
    auto ctx = ctx_for(st);
    json p = backend.propose(ctx);
    CHECK(p["preprocessing"]["replicas"] == 3);
    CHECK(p["inference"]["rate_ratio"] == 0.6);  // string coerced to number
    CHECK(backend.calls() == 1);
    {
        std::lock_guard<std::mutex> lock(server.mu);
        CHECK(server.last_auth == "Bearer testkey");
        json body = json::parse(server.last_body);
        CHECK(body["model"] == "test-model");
        CHECK(body["temperature"] == 1.0);
        REQUIRE(body["messages"].size() == 1);
        CHECK(body["messages"][0]["role"] == "user");
        std::string prompt = body["messages"][0]["content"];
        CHECK(prompt.find("Current state:") != std::string::npos);
        CHECK(prompt.find("Reply with exactly one JSON object") != std::string::npos);
    }

    RawAction raw = absolute_to_delta(p, st);
    CooldownState cd(3);
    auto act = validate(raw, st, cd, 0.0);
    CHECK(act.stages[0].replicas == 1);
    CHECK(act.stages[1].rate_ratio_tenths == 1);
}

TEST_CASE("http backend re-asks once after an unusable reply") {
    FakeLlm server;
    server.replies = {"Scaling feels right today.",
                      R"({"postprocessing": {"action": "scale_replicas", "replicas": 3}})"};
    HttpLlmBackend backend(server.config());
    auto st = pipeline3();
    auto ctx = ctx_for(st);
    json p = backend.propose(ctx);
    CHECK(p["postprocessing"]["replicas"] == 3);
    CHECK(backend.calls() == 2);
    {
        std::lock_guard<std::mutex> lock(server.mu);
        json body = json::parse(server.last_body);
        REQUIRE(body["messages"].size() == 3);  // prompt, bad reply, corrective ask
        CHECK(body["messages"][1]["role"] == "assistant");
        CHECK(body["messages"][1]["content"] == "Scaling feels right today.");
        CHECK(body["messages"][2]["role"] == "user");
    }
}

TEST_CASE("two unusable replies fall back to a no-op decision") {
    FakeLlm server;
    server.replies = {"no json here", "still no json"};
    HttpLlmBackend backend(server.config());
    auto st = pipeline3();
    auto ctx = ctx_for(st);
    ExplorationSchedule never(0.0, 1.0, 0.0);
    Rng rng(5);
    Decision d = decide(backend, ctx, never, rng);
    CHECK(d.backend_failed);
    CHECK(d.source == "llm");
    CHECK(backend.calls() == 2);
    CooldownState cd(3);
    CHECK(validate(absolute_to_delta(d.proposal, st), st, cd, 0.0).is_noop());
}

TEST_CASE("http backend dumps prompt and response artifacts when asked") {
    namespace fs = std::filesystem;
    FakeLlm server;
    server.replies = {R"({"preprocessing": {"action": "none"}})"};
    LlmConfig cfg = server.config();
    cfg.artifact_dir = (fs::temp_directory_path() / "scalelab_artifact_test").string();
    fs::remove_all(cfg.artifact_dir);
    HttpLlmBackend backend(cfg);
    auto st = pipeline3();
    auto ctx = ctx_for(st);
    ctx.round = 7;
    backend.propose(ctx);
    CHECK(fs::exists(fs::path(cfg.artifact_dir) / "round_0007_prompt.txt"));
    CHECK(fs::exists(fs::path(cfg.artifact_dir) / "round_0007_response.txt"));
    fs::remove_all(cfg.artifact_dir);

    CHECK_THROWS_AS(HttpLlmBackend(LlmConfig{}), std::invalid_argument);
}

namespace {

// Emits structurally hostile proposals and sometimes throws outright.
class ChaosBackend : public PolicyBackend {
public:
    explicit ChaosBackend(std::uint64_t seed) : rng_(seed) {}
    json propose(const DecisionContext& ctx) override {
        if (rng_.uniform() < 0.1) throw std::runtime_error("chaos");
        json j = json::object();
        for (const auto& s : ctx.state->stages) {
            switch (rng_.uniform_int(6)) {
                case 0: break;
                case 1: j[s.name] = "garbage"; break;
                case 2: j[s.name] = json::array({1, 2, 3}); break;
                case 3: j[s.name] = {{"replicas", "many"}, {"rate_ratio", "fast"}}; break;
                case 4:
                    j[s.name] = {{"action", "scale_both"},
                                 {"replicas", rng_.uniform() * 100.0 - 50.0},
                                 {"cpu_millicores", rng_.uniform() * 1e7 - 5e6},
                                 {"memory_mb", rng_.uniform() * 1e6 - 5e5},
                                 {"rate_ratio", rng_.uniform() * 4.0 - 2.0}};
                    break;
                case 5:
                    j[s.name] = {{"action", "adjust_rate"},
                                 {"rate_ratio", rng_.uniform() < 0.5
                                                    ? std::nan("")
                                                    : rng_.uniform() * 2.0}};
                    break;
            }
        }
        return j;
    }
    std::string name() const override { return "chaos"; }

private:
    Rng rng_;
};

}  // namespace

TEST_CASE("end to end closure: hostile backend output always validates onto the grid") {
    auto st = pipeline3();
    auto ctx = ctx_for(st);
    ChaosBackend backend(99);
    ExplorationSchedule sched;  // live schedule: probes mixed in
    Rng rng(17);
    CooldownState cd(3);
    for (int round = 0; round < 2000; ++round) {
        Decision d = decide(backend, ctx, sched, rng);
        RawAction raw = d.is_probe() ? to_raw(d.probe_action)
                                     : absolute_to_delta(d.proposal, st);
        ScalingAction act = validate(raw, st, cd, round * 30.0);
        REQUIRE(act.stages.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            const StageDelta& delta = act.stages[i];
            const ResourceConfig& cur = st.stages[i].config;
            CHECK(std::count(kReplicaDeltas.begin(), kReplicaDeltas.end(),
                             delta.replicas) == 1);
            CHECK(cur.replicas + delta.replicas >= 1);
            CHECK(cur.replicas + delta.replicas <= 8);
            CHECK(std::count(kCpuDeltas.begin(), kCpuDeltas.end(), delta.cpu_millicores) ==
                  1);
            CHECK(std::count(kMemDeltas.begin(), kMemDeltas.end(), delta.memory_mb) == 1);
            CHECK(std::count(kRateTenthDeltas.begin(), kRateTenthDeltas.end(),
                             delta.rate_ratio_tenths) == 1);
        }
    }
}
