#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "scalelab/cost.hpp"
#include "scalelab/reward.hpp"

using namespace scalelab;

namespace {

ScalingAction one_replica_up(std::size_t stages, std::size_t which) {
    auto a = ScalingAction::noop(stages);
    a.stages[which].replicas = 1;
    return a;
}

}  // namespace

TEST_CASE("action magnitude aggregates all dimensions") {
    CHECK(action_magnitude(ScalingAction::noop(3)) == 0.0);
    auto a = ScalingAction::noop(2);
    a.stages[0].replicas = 2;
    a.stages[0].cpu_millicores = -500;
    a.stages[1].rate_ratio_tenths = 1;
    // |dn|=2, cpu step 0.5*1, rho 0.5*0.1, two stages touched -> +1
    CHECK(action_magnitude(a) == doctest::Approx(2.0 + 0.5 + 0.05 + 1.0));
}

TEST_CASE("sla penalty is quadratic past the target and zero at it") {
    ParetoFrontier f(2000.0, 10.0);
    RewardConfig cfg;  // t_sla 500
    RewardInputs in{400.0, 1000.0, 1.0, 1.0};
    auto r = compute_reward(in, ScalingAction::noop(1), f, cfg);
    CHECK(r.sla == doctest::Approx(-3.0));  // -(2)^2 + 1
    in.l_after_ms = 500.0;  // exactly at target: no penalty
    CHECK(compute_reward(in, ScalingAction::noop(1), f, cfg).sla == 0.0);
    in.l_after_ms = 500.0001;  // continuity just past the boundary
    CHECK(compute_reward(in, ScalingAction::noop(1), f, cfg).sla ==
          doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("no-op on an unchanged state scores only the frontier term") {
    ParetoFrontier f(2000.0, 10.0);
    f.update(600.0, 2.0);
    RewardConfig cfg;
    RewardInputs in{450.0, 450.0, 2.0, 2.0};
    auto r = compute_reward(in, ScalingAction::noop(1), f, cfg);
    CHECK(r.latency == 0.0);
    CHECK(r.cost == 0.0);
    CHECK(r.sla == 0.0);
    CHECK(r.proactive == 0.0);
    CHECK(r.total == doctest::Approx(r.pareto).epsilon(1e-12));
}

TEST_CASE("golden vector: hand-evaluated full breakdown") {
    // frontier normalizers 400ms / $10; existing point (100ms, 1.2) sits at
    // normalized (0.25, 0.12) and dominates the outcome (0.75, 0.12) at
    // distance exactly 0.5
    ParetoFrontier f(400.0, 10.0);
    f.update(100.0, 1.2);
    RewardConfig cfg;
    cfg.t_sla_ms = 500.0;
    cfg.l_baseline_ms = 400.0;
    cfg.c_budget = 10.0;
    RewardInputs in{400.0, 300.0, 1.0, 1.2};
    auto r = compute_reward(in, one_replica_up(1, 0), f, cfg);
    CHECK(r.latency == doctest::Approx(0.175).epsilon(1e-9));
    CHECK(r.cost == doctest::Approx(-0.006).epsilon(1e-9));
    CHECK(r.sla == 0.0);
    CHECK(r.proactive == 0.0);
    CHECK(r.pareto == doctest::Approx(0.8 / 1.5).epsilon(1e-9));
    CHECK(r.total == doctest::Approx(0.175 - 0.006 + 0.8 / 1.5).epsilon(1e-9));
    CHECK_FALSE(r.clipped);
}

TEST_CASE("proactive credit keys off the pre-action latency") {
    ParetoFrontier f(2000.0, 10.0);
    RewardConfig cfg;
    RewardInputs in{750.0, 400.0, 1.0, 1.0};  // was 1.5x the target
    auto a = one_replica_up(1, 0);
    auto r = compute_reward(in, a, f, cfg);
    // sigma = 0.5, mu = 1 + 0.5, w = 0.3
    CHECK(r.proactive == doctest::Approx(0.5 * 1.5 * 0.3).epsilon(1e-12));
    // same outcome but no pressure before: no credit
    in.l_before_ms = 400.0;
    CHECK(compute_reward(in, a, f, cfg).proactive == 0.0);
}

TEST_CASE("total clips at the configured bound") {
    ParetoFrontier f(2000.0, 10.0);
    RewardConfig cfg;
    RewardInputs in{40000.0, 100.0, 5.0, 1.0};  // huge latency collapse
    auto r = compute_reward(in, one_replica_up(1, 0), f, cfg);
    CHECK(r.total == cfg.r_max);
    CHECK(r.clipped);
    RewardInputs worse{100.0, 40000.0, 1.0, 5.0};
    auto r2 = compute_reward(worse, ScalingAction::noop(1), f, cfg);
    CHECK(r2.total == -cfg.r_max);
    CHECK(r2.clipped);
}

TEST_CASE("configuration errors are rejected") {
    ParetoFrontier f(2000.0, 10.0);
    RewardInputs in{400.0, 300.0, 1.0, 1.0};
    RewardConfig bad;
    bad.t_sla_ms = 0.0;
    CHECK_THROWS_AS(compute_reward(in, ScalingAction::noop(1), f, bad),
                    std::invalid_argument);
    RewardConfig bad2;
    bad2.c_budget = 0.0;
    CHECK_THROWS_AS(compute_reward(in, ScalingAction::noop(1), f, bad2),
                    std::invalid_argument);
}

TEST_CASE("frontier reward separation between dominance classes") {
    // random frontiers; every (non-dominated, dominated) pair must be split
    // by at least 0.2
    std::mt19937_64 gen(424242);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        ParetoFrontier f(1.0, 1.0);
        int points = 1 + static_cast<int>(gen() % 6);
        for (int i = 0; i < points; ++i) f.update(unif(gen), unif(gen));
        double min_nondom = 1e300, max_dom = -1e300;
        for (int i = 0; i < 40; ++i) {
            ObjectivePoint p{unif(gen), unif(gen)};
            double r = f.reward(p);
            if (f.strictly_dominated(p))
                max_dom = std::max(max_dom, r);
            else
                min_nondom = std::min(min_nondom, r);
        }
        if (min_nondom < 1e300 && max_dom > -1e300)
            CHECK(min_nondom - max_dom >= 0.2 - 1e-12);
    }
}

TEST_CASE("cost model: billable vs effective") {
    PipelineState st;
    StageSnapshot gpu;
    gpu.kind = StageKind::Gpu;
    gpu.config.replicas = 1;
    gpu.config.cpu_millicores = 0;
    gpu.config.rate_ratio = 0.5;
    st.stages.push_back(gpu);
    CostModel eff;
    CHECK(cost_rate_per_hour(st, eff) == doctest::Approx(1.53));
    CostModel bill;
    bill.mode = CostModel::Mode::Billable;
    CHECK(cost_rate_per_hour(st, bill) == doctest::Approx(3.06));
    st.stages[0].config.rate_ratio = 1.0;
    CHECK(cost_rate_per_hour(st, eff) == cost_rate_per_hour(st, bill));

    // mixed pipeline, hand-computed
    PipelineState mixed;
    StageSnapshot pre;
    pre.kind = StageKind::Cpu;
    pre.config.replicas = 2;
    pre.config.cpu_millicores = 1500;
    mixed.stages.push_back(pre);
    StageSnapshot inf = gpu;
    inf.config.replicas = 3;
    inf.config.cpu_millicores = 1000;
    inf.config.rate_ratio = 0.4;
    mixed.stages.push_back(inf);
    // cpu: 2*1.5*0.048 + 3*1.0*0.048 = 0.144 + 0.144; gpu: 3*0.4*3.06
    CHECK(cost_rate_per_hour(mixed, eff) ==
          doctest::Approx(0.144 + 0.144 + 3.672).epsilon(1e-12));
    CHECK(interval_cost(mixed, eff, 30.0) ==
          doctest::Approx((0.288 + 3.672) / 120.0).epsilon(1e-12));
    // throttling below full rate always cuts the effective bill
    CHECK(cost_rate_per_hour(mixed, eff) < cost_rate_per_hour(mixed, bill));
}
