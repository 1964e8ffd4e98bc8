#include "scalelab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <thread>

#include "scalelab/baselines.hpp"
#include "scalelab/svg_plot.hpp"
#include "scalelab/validator.hpp"

namespace scalelab {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double rollout_reward(const Simulator& base, const ScalingAction& act, double l_before_ms,
                      double c_before, const ParetoFrontier& frontier,
                      const RewardConfig& rcfg, const OracleConfig& ocfg) {
    Simulator clone = base;
    clone.apply(act);
    clone.step(ocfg.settle_s);
    clone.begin_window();
    clone.step(ocfg.measure_s);
    PipelineState after = clone.snapshot();
    CostModel eff;
    RewardInputs in;
    in.l_before_ms = l_before_ms;
    in.l_after_ms = guarded_p99(after, l_before_ms, rcfg.t_sla_ms);
    in.c_before = c_before;
    in.c_after = cost_rate_per_hour(after, eff);
    return compute_reward(in, act, frontier, rcfg).total;
}

ScalingAction single_knob(std::size_t n_stages, std::size_t stage, int dn, int dc, int dm,
                          int dt) {
    ScalingAction a = ScalingAction::noop(n_stages);
    a.stages[stage].replicas = dn;
    a.stages[stage].cpu_millicores = dc;
    a.stages[stage].memory_mb = dm;
    a.stages[stage].rate_ratio_tenths = dt;
    return a;
}

}  // namespace

double guarded_p99(const PipelineState& after, double l_before_ms, double t_sla_ms) {
    if (after.latency_p99_ms > 0.0) return after.latency_p99_ms;
    return std::max(l_before_ms, 2.0 * t_sla_ms);
}

OracleOutcome oracle_best_action(const Simulator& sim, const ScalingAction& executed,
                                 const std::vector<ScalingAction>& retrieved,
                                 const PipelineState& before, double l_before_ms,
                                 double c_before, const ParetoFrontier& frontier,
                                 const RewardConfig& rcfg, const ValidatorConfig& limits,
                                 const CooldownState& cooldowns, const OracleConfig& ocfg) {
    const std::size_t S = sim.resources().size();
    const double now = sim.now_s();
    OracleOutcome out;

    std::vector<ScalingAction> cands;
    std::set<std::string> seen;
    auto add = [&](const ScalingAction& a) -> bool {
        if (cands.size() >= ocfg.max_candidates) {
            out.restricted = true;
            return false;
        }
        if (seen.insert(encode_action(a)).second) cands.push_back(a);
        return true;
    };

    const ScalingAction noop = ScalingAction::noop(S);
    add(noop);
    add(executed);
    for (std::size_t s = 0; s < S; ++s) {
        for (int dn : {-1, 1, 2})
            add(validate(to_raw(single_knob(S, s, dn, 0, 0, 0)), before, cooldowns, now, limits));
        if (before.stages[s].kind == StageKind::Cpu) {
            for (int dc : {-kCpuStepMillicores, kCpuStepMillicores})
                add(validate(to_raw(single_knob(S, s, 0, dc, 0, 0)), before, cooldowns, now,
                             limits));
            for (int dm : {-kMemStepMb, kMemStepMb})
                add(validate(to_raw(single_knob(S, s, 0, 0, dm, 0)), before, cooldowns, now,
                             limits));
        } else {
            for (int dt : {-1, 1, 2})
                add(validate(to_raw(single_knob(S, s, 0, 0, 0, dt)), before, cooldowns, now,
                             limits));
        }
    }
    std::set<std::string> retrieved_keys;
    retrieved_keys.insert(encode_action(noop));
    for (const ScalingAction& r : retrieved) {
        if (r.stages.size() != S) continue;  // stored against another pipeline
        ScalingAction v = validate(to_raw(r), before, cooldowns, now, limits);
        if (!add(v)) break;
        retrieved_keys.insert(encode_action(v));
    }

    std::map<std::string, double> reward_of;
    out.best_reward = -std::numeric_limits<double>::infinity();
    out.best_retrieved_reward = -std::numeric_limits<double>::infinity();
    for (const ScalingAction& a : cands) {
        double r = rollout_reward(sim, a, l_before_ms, c_before, frontier, rcfg, ocfg);
        reward_of[encode_action(a)] = r;
        if (r > out.best_reward) {
            out.best_reward = r;
            out.best = a;
        }
    }
    out.executed_reward = reward_of.at(encode_action(executed));
    for (const std::string& k : retrieved_keys) {
        auto it = reward_of.find(k);
        if (it != reward_of.end())
            out.best_retrieved_reward = std::max(out.best_retrieved_reward, it->second);
    }
    return out;
}

RunResult run_experiment(const Scenario& scenario) {
    Scenario sc = scenario;
    validate_scenario(sc);

    std::unique_ptr<PolicyBackend> backend;
    std::unique_ptr<BaselineController> baseline;
    if (sc.controller == "icrl-mock") {
        backend = std::make_unique<MockBackend>(sc.mock);
    } else if (sc.controller == "icrl-llm") {
        LlmConfig lc = LlmConfig::from_env();
        if (lc.endpoint.empty())
            throw std::runtime_error(
                "controller icrl-llm needs SCALELAB_LLM_ENDPOINT (and usually "
                "SCALELAB_LLM_MODEL) in the environment");
        backend = std::make_unique<HttpLlmBackend>(lc);
    } else {
        baseline = make_baseline(sc.baseline);
    }

    const std::size_t S = sc.stages.size();
    Simulator sim(sc.sim_config());
    ParetoFrontier frontier(sc.frontier_l_max_ms, sc.frontier_c_max);
    ExperienceBuffer buffer(sc.r_min);
    if (!sc.experience_path.empty() && std::filesystem::exists(sc.experience_path))
        buffer = ExperienceBuffer::load(sc.experience_path, sc.r_min);
    ExplorationSchedule schedule(sc.eps0, sc.eps_decay, sc.eps_floor);
    CooldownState cooldowns(S);
    CooldownState never_noted(S);  // baselines keep their own stabilization timers
    Rng rng(sc.seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);

    CostModel eff;
    CostModel bill;
    bill.mode = CostModel::Mode::Billable;
    OracleConfig ocfg;
    ocfg.settle_s = sc.settle_s;
    ocfg.measure_s = sc.measure_s;

    RunResult res;
    RunSummary& sum = res.summary;
    sum.scenario = sc.name;
    sum.controller = sc.controller;
    sum.seed = sc.seed;
    sum.rounds = sc.rounds;
    sum.oracle_enabled = sc.oracle;
    sum.scale_ups_by_stage.assign(S, 0);

    const double interval_s = sc.settle_s + sc.measure_s;
    std::vector<double> all_ms;
    double thr_sum = 0.0;
    int thr_windows = 0;

    // Warmup: one settled measurement window gives the first "before" state.
    sim.step(sc.settle_s);
    sim.begin_window();
    sim.step(sc.measure_s);
    PipelineState prev = sim.snapshot();
    sum.cost_effective_usd += interval_cost(prev, eff, interval_s);
    sum.cost_billable_usd += interval_cost(prev, bill, interval_s);
    const auto& warm = sim.window_latency_samples();
    all_ms.insert(all_ms.end(), warm.begin(), warm.end());
    thr_sum += prev.throughput_rps;
    ++thr_windows;
    double l_curr = guarded_p99(prev, 0.0, sc.reward.t_sla_ms);
    double c_curr = cost_rate_per_hour(prev, eff);

    double policy_gap_sum = 0.0;  // sum of (1-eps)(xi+eta) over attributed rounds
    double delta_hat = 0.0;       // rounds the backend failed on

    for (int t = 1; t <= sc.rounds; ++t) {
        prev.frontier_snapshot = frontier.points();
        std::vector<double> feats = context_features(prev);

        Decision dec;
        ScalingAction act;
        std::vector<SelectedExperience> selected;
        if (backend) {
            selected = buffer.select(feats, sc.selection);
            DecisionContext ctx;
            ctx.state = &prev;
            ctx.retrieved = &selected;
            ctx.buffer = &buffer;
            ctx.selection = sc.selection;
            ctx.limits = sc.limits;
            ctx.t_sla_ms = sc.reward.t_sla_ms;
            ctx.c_budget_per_hour = sc.reward.c_budget;
            ctx.round = t;
            dec = decide(*backend, ctx, schedule, rng);
            RawAction raw = dec.is_probe() ? to_raw(dec.probe_action)
                                           : absolute_to_delta(dec.proposal, prev, nullptr);
            act = validate(raw, prev, cooldowns, sim.now_s(), sc.limits);
        } else {
            dec.source = baseline->name();
            act = validate(to_raw(baseline->decide(prev, sim.now_s())), prev, never_noted,
                           sim.now_s(), sc.limits);
        }

        OracleOutcome oo;
        if (sc.oracle) {
            std::vector<ScalingAction> retrieved_actions;
            retrieved_actions.reserve(selected.size());
            for (const SelectedExperience& se : selected)
                retrieved_actions.push_back(se.experience.action);
            oo = oracle_best_action(sim, act, retrieved_actions, prev, l_curr, c_curr,
                                    frontier, sc.reward, sc.limits, cooldowns, ocfg);
            sum.oracle_restricted = sum.oracle_restricted || oo.restricted;
        }

        sim.apply(act);
        cooldowns.note(act, sim.now_s());
        sim.step(sc.settle_s);
        sim.begin_window();
        sim.step(sc.measure_s);
        PipelineState after = sim.snapshot();
        double l_after = guarded_p99(after, l_curr, sc.reward.t_sla_ms);
        double c_after = cost_rate_per_hour(after, eff);

        RewardInputs in;
        in.l_before_ms = l_curr;
        in.l_after_ms = l_after;
        in.c_before = c_curr;
        in.c_after = c_after;
        RewardBreakdown rb = compute_reward(in, act, frontier, sc.reward);
        if (after.latency_p99_ms > 0.0) frontier.update(l_after, c_after);

        if (backend) {
            Experience e;
            e.context = feats;
            e.action = act;
            e.reward = rb.total;
            e.round = t;
            e.source = dec.is_probe() ? "probe" : backend->name();
            buffer.store(std::move(e));
        }

        EpisodeRecord rec;
        rec.round = t;
        rec.t_s = sim.now_s();
        rec.source = dec.source;
        rec.backend_failed = dec.backend_failed;
        rec.epsilon = dec.epsilon_used;
        rec.context = feats;
        rec.action = act;
        rec.reward = rb;
        rec.l_before_ms = l_curr;
        rec.l_after_ms = l_after;
        rec.c_before = c_curr;
        rec.c_after = c_after;
        rec.throughput_rps = after.throughput_rps;
        rec.cost_billable = interval_cost(after, bill, interval_s);
        rec.cost_effective = interval_cost(after, eff, interval_s);
        rec.oracle_enabled = sc.oracle;
        if (sc.oracle) {
            rec.oracle_reward = oo.best_reward;
            rec.oracle_action = oo.best;
            bool attributed = !dec.is_probe() && !dec.backend_failed;
            if (attributed) {
                rec.xi = std::max(0.0, oo.best_reward - oo.best_retrieved_reward);
                rec.eta = std::max(0.0, oo.best_retrieved_reward - oo.executed_reward);
                sum.xi_sum += rec.xi;
                sum.eta_sum += rec.eta;
                policy_gap_sum += (1.0 - dec.epsilon_used) * (rec.xi + rec.eta);
            } else {
                rec.xi = kNan;
                rec.eta = kNan;
            }
            sum.regret_measured += oo.best_reward - rb.total;
        } else {
            rec.oracle_reward = kNan;
            rec.xi = kNan;
            rec.eta = kNan;
        }
        res.log.records.push_back(std::move(rec));

        sum.reward_total += rb.total;
        sum.reward_latency += rb.latency;
        sum.reward_cost += rb.cost;
        sum.reward_sla += rb.sla;
        sum.reward_proactive += rb.proactive;
        sum.reward_pareto += rb.pareto;
        sum.cost_effective_usd += interval_cost(after, eff, interval_s);
        sum.cost_billable_usd += interval_cost(after, bill, interval_s);
        sum.epsilon_sum += dec.epsilon_used;
        if (dec.is_probe()) ++sum.probe_rounds;
        if (dec.backend_failed) {
            ++sum.backend_failures;
            delta_hat += 1.0;
        }
        if (!act.is_noop()) ++sum.scaling_events;
        for (std::size_t s = 0; s < S; ++s)
            if (act.stages[s].replicas > 0) ++sum.scale_ups_by_stage[s];
        const auto& win = sim.window_latency_samples();
        all_ms.insert(all_ms.end(), win.begin(), win.end());
        thr_sum += after.throughput_rps;
        ++thr_windows;

        prev = after;
        l_curr = l_after;
        c_curr = c_after;
    }

    if (!sc.experience_path.empty() && backend) buffer.persist(sc.experience_path);

    if (!all_ms.empty()) {
        sum.p99_ms = sample_percentile(all_ms, 99.0);
        sum.mean_ms = std::accumulate(all_ms.begin(), all_ms.end(), 0.0) / all_ms.size();
    }
    sum.mean_throughput_rps = thr_windows ? thr_sum / thr_windows : 0.0;
    sum.requests_completed = sim.total_completions();
    if (sum.requests_completed > 0)
        sum.cost_per_1k_requests = sum.cost_effective_usd / (sum.requests_completed / 1000.0);
    sum.final_epsilon = schedule.value();
    sum.frontier_hypervolume = frontier.hypervolume();
    if (sc.oracle) {
        sum.regret_bound = policy_gap_sum + (sum.epsilon_sum + delta_hat) * sc.reward.r_max;
        sum.regret_bound_holds = sum.regret_measured <= sum.regret_bound + 1e-9;
    }
    return res;
}

nlohmann::json RunSummary::to_json() const {
    nlohmann::json j;
    j["scenario"] = scenario;
    j["controller"] = controller;
    j["seed"] = seed;
    j["rounds"] = rounds;
    j["p99_ms"] = p99_ms;
    j["mean_ms"] = mean_ms;
    j["mean_throughput_rps"] = mean_throughput_rps;
    j["requests_completed"] = requests_completed;
    j["cost_billable_usd"] = cost_billable_usd;
    j["cost_effective_usd"] = cost_effective_usd;
    j["cost_per_1k_requests"] = cost_per_1k_requests;
    j["reward"] = {{"total", reward_total},       {"latency", reward_latency},
                   {"cost", reward_cost},         {"sla", reward_sla},
                   {"proactive", reward_proactive}, {"pareto", reward_pareto}};
    j["scaling_events"] = scaling_events;
    j["probe_rounds"] = probe_rounds;
    j["backend_failures"] = backend_failures;
    j["scale_ups_by_stage"] = scale_ups_by_stage;
    j["final_epsilon"] = final_epsilon;
    j["frontier_hypervolume"] = frontier_hypervolume;
    j["oracle_enabled"] = oracle_enabled;
    if (oracle_enabled) {
        j["regret"] = {{"measured", regret_measured},
                       {"bound", regret_bound},
                       {"bound_holds", regret_bound_holds},
                       {"xi_sum", xi_sum},
                       {"eta_sum", eta_sum},
                       {"epsilon_sum", epsilon_sum},
                       {"oracle_restricted", oracle_restricted}};
    }
    return j;
}

// ---- bottleneck identification -------------------------------------------

std::string detect_bottleneck(const Scenario& scenario, int probes_per_stage) {
    Scenario sc = scenario;
    validate_scenario(sc);
    const std::size_t S = sc.stages.size();
    const double warm_s = 6.0, settle_s = 6.0, measure_s = 10.0;
    std::vector<int> votes(S, 0);
    Rng tie_rng(sc.seed ^ 0xd1b54a32d192ed03ULL);

    for (int cycle = 0; cycle < probes_per_stage; ++cycle) {
        SimulatorConfig cfg = sc.sim_config();
        cfg.seed = sc.seed + 0x9e3779b9ULL * static_cast<std::uint64_t>(cycle + 1);
        cfg.workload.seed = cfg.seed;
        Simulator base(cfg);
        base.step(warm_s);
        std::vector<double> thr(S, 0.0);
        for (std::size_t s = 0; s < S; ++s) {
            Simulator clone = base;
            ScalingAction probe = ScalingAction::noop(S);
            probe.stages[s].replicas = 1;
            clone.apply(probe);
            clone.step(settle_s);
            clone.begin_window();
            clone.step(measure_s);
            thr[s] = clone.snapshot().throughput_rps;
        }
        double best = *std::max_element(thr.begin(), thr.end());
        std::vector<std::size_t> tied;
        for (std::size_t s = 0; s < S; ++s)
            if (thr[s] >= best - 1e-12) tied.push_back(s);
        votes[tied[tie_rng.uniform_int(tied.size())]]++;
    }

    std::size_t top = 0;
    for (std::size_t s = 1; s < S; ++s)
        if (votes[s] > votes[top]) top = s;
    int runner_up = 0;
    for (std::size_t s = 0; s < S; ++s)
        if (s != top) runner_up = std::max(runner_up, votes[s]);
    if (runner_up >= 0.8 * votes[top]) return "multiple";
    return sc.stages[top].name;
}

std::vector<DetectionScenario> make_detection_suite(int per_class, std::uint64_t seed) {
    static const std::array<const char*, 4> kClasses{"preprocessing", "inference",
                                                     "postprocessing", "multiple"};
    Rng rng(seed);
    auto span = [&](double lo, double hi) { return lo + rng.uniform() * (hi - lo); };

    std::vector<DetectionScenario> suite;
    for (std::size_t c = 0; c < kClasses.size(); ++c) {
        for (int k = 0; k < per_class; ++k) {
            double lambda = span(8.0, 14.0);
            // Per-replica rates: constrained stages get a fraction of the
            // offered load, healthy ones comfortable headroom. A lone
            // bottleneck is relieved by one extra replica; a joint pair is
            // not, which is exactly what the probe votes discriminate.
            std::vector<double> rate(3);
            for (auto& r : rate) r = lambda * span(1.6, 2.2);
            if (c < 3) {
                rate[c] = lambda * span(0.55, 0.75);
            } else {
                std::size_t skip = rng.uniform_int(3);
                double tight = lambda * span(0.30, 0.40);
                for (std::size_t s = 0; s < 3; ++s)
                    if (s != skip) rate[s] = tight;
            }

            Scenario sc;
            sc.name = std::string{kClasses[c]} + "-" + std::to_string(k);
            sc.seed = rng.raw() | 1ULL;
            sc.workload.kind = WorkloadKind::Poisson;
            sc.workload.base_rate = lambda;
            for (std::size_t s = 0; s < 3; ++s) {
                StageSpec sp;
                sp.name = kClasses[s];
                sp.kind = s == 1 ? StageKind::Gpu : StageKind::Cpu;
                sp.base_service_rate = rate[s];
                sp.startup_delay_s = 0.0;  // probes must serve within the cycle
                sc.stages.push_back(sp);
            }
            validate_scenario(sc);
            suite.push_back({std::move(sc), kClasses[c]});
        }
    }
    return suite;
}

DetectionReport evaluate_bottleneck_detection(const std::vector<DetectionScenario>& suite,
                                              int probes_per_stage, int threads) {
    DetectionReport rep;
    rep.classes = {"preprocessing", "inference", "postprocessing", "multiple"};
    rep.confusion.assign(4, std::vector<int>(4, 0));
    rep.probes_per_stage = probes_per_stage;
    rep.scenarios = static_cast<int>(suite.size());

    std::vector<std::string> predicted(suite.size());
    if (threads <= 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < suite.size(); i = next.fetch_add(1))
            predicted[i] = detect_bottleneck(suite[i].scenario, probes_per_stage);
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < threads; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    auto class_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < rep.classes.size(); ++i)
            if (rep.classes[i] == name) return i;
        return rep.classes.size();
    };
    int correct = 0;
    for (std::size_t i = 0; i < suite.size(); ++i) {
        std::size_t t = class_index(suite[i].truth);
        std::size_t p = class_index(predicted[i]);
        rep.confusion[t][p]++;
        if (t == p) ++correct;
    }
    rep.accuracy = suite.empty() ? 0.0 : static_cast<double>(correct) / suite.size();
    rep.precision.assign(4, 0.0);
    rep.recall.assign(4, 0.0);
    rep.f1.assign(4, 0.0);
    for (std::size_t c = 0; c < 4; ++c) {
        int tp = rep.confusion[c][c], pred = 0, truth = 0;
        for (std::size_t o = 0; o < 4; ++o) {
            pred += rep.confusion[o][c];
            truth += rep.confusion[c][o];
        }
        rep.precision[c] = pred ? static_cast<double>(tp) / pred : 0.0;
        rep.recall[c] = truth ? static_cast<double>(tp) / truth : 0.0;
        double pr = rep.precision[c] + rep.recall[c];
        rep.f1[c] = pr > 0 ? 2.0 * rep.precision[c] * rep.recall[c] / pr : 0.0;
    }
    return rep;
}

std::string DetectionReport::to_text() const {
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof buf,
                  "Bottleneck identification: %d scenarios, %d probes/stage\n", scenarios,
                  probes_per_stage);
    out += buf;
    out += "Class            Precision   Recall       F1\n";
    for (std::size_t c = 0; c < classes.size(); ++c) {
        std::snprintf(buf, sizeof buf, "%-16s %9.3f %8.3f %8.3f\n", classes[c].c_str(),
                      precision[c], recall[c], f1[c]);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "Overall accuracy: %.3f\n", accuracy);
    out += buf;
    out += "Confusion matrix (rows = truth, columns = predicted):\n";
    out += "                  pre   inf  post  mult\n";
    for (std::size_t t = 0; t < classes.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%-16s", classes[t].c_str());
        out += buf;
        for (std::size_t p = 0; p < classes.size(); ++p) {
            std::snprintf(buf, sizeof buf, " %5d", confusion[t][p]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

nlohmann::json DetectionReport::to_json() const {
    nlohmann::json j;
    j["classes"] = classes;
    j["confusion"] = confusion;
    j["precision"] = precision;
    j["recall"] = recall;
    j["f1"] = f1;
    j["accuracy"] = accuracy;
    j["probes_per_stage"] = probes_per_stage;
    j["scenarios"] = scenarios;
    return j;
}

// ---- export ---------------------------------------------------------------

void check_writable(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
    auto probe = std::filesystem::path(dir) / ".write_probe";
    {
        std::ofstream f(probe);
        if (!f) throw std::runtime_error("output directory not writable: " + dir);
    }
    std::filesystem::remove(probe, ec);
}

std::vector<std::string> export_run(const RunResult& result, const std::string& dir) {
    check_writable(dir);
    const std::string base =
        (std::filesystem::path(dir) / (result.summary.scenario + "_" + result.summary.controller))
            .string();
    std::vector<std::string> files;

    files.push_back(base + "_log.csv");
    result.log.to_csv(files.back());

    files.push_back(base + "_summary.json");
    {
        std::ofstream f(files.back());
        f << result.summary.to_json().dump(2) << '\n';
    }

    PlotSeries reward_cum{"cumulative reward", {}, {}};
    PlotSeries reward_round{"per-round reward", {}, {}};
    PlotSeries thr{"throughput (req/s)", {}, {}};
    PlotSeries lat{"p99 latency (ms)", {}, {}};
    double cum = 0.0;
    for (const EpisodeRecord& r : result.log.records) {
        double x = r.round;
        cum += r.reward.total;
        reward_cum.x.push_back(x);
        reward_cum.y.push_back(cum);
        reward_round.x.push_back(x);
        reward_round.y.push_back(r.reward.total);
        thr.x.push_back(x);
        thr.y.push_back(r.throughput_rps);
        lat.x.push_back(x);
        lat.y.push_back(r.l_after_ms);
    }
    files.push_back(base + "_reward.svg");
    line_chart_svg(files.back(), result.summary.scenario + ": reward", "round", "reward",
                   {reward_cum, reward_round});
    files.push_back(base + "_throughput.svg");
    line_chart_svg(files.back(), result.summary.scenario + ": throughput", "round", "req/s",
                   {thr});
    files.push_back(base + "_latency.svg");
    line_chart_svg(files.back(), result.summary.scenario + ": p99 latency", "round", "ms",
                   {lat});

    files.push_back(base + "_reward_components.svg");
    PlotSeries comp{"component sum", {}, {result.summary.reward_latency, result.summary.reward_cost,
                                          result.summary.reward_sla, result.summary.reward_proactive,
                                          result.summary.reward_pareto}};
    bar_chart_svg(files.back(), result.summary.scenario + ": reward components", "sum",
                  {"latency", "cost", "sla", "proactive", "pareto"}, {comp});
    return files;
}

std::vector<std::string> export_comparison(const std::vector<RunSummary>& summaries,
                                           const std::string& dir) {
    check_writable(dir);
    std::vector<std::string> groups;
    PlotSeries p99{"p99 (ms)", {}, {}};
    PlotSeries cost{"effective $ / 1k requests", {}, {}};
    for (const RunSummary& s : summaries) {
        groups.push_back(s.controller + "/" + std::to_string(s.seed));
        p99.y.push_back(s.p99_ms);
        cost.y.push_back(s.cost_per_1k_requests);
    }
    std::vector<std::string> files;
    files.push_back((std::filesystem::path(dir) / "comparison_p99.svg").string());
    bar_chart_svg(files.back(), "P99 latency by controller", "ms", groups, {p99});
    files.push_back((std::filesystem::path(dir) / "comparison_cost.svg").string());
    bar_chart_svg(files.back(), "Effective cost by controller", "$ / 1k requests", groups,
                  {cost});
    return files;
}

}  // namespace scalelab
