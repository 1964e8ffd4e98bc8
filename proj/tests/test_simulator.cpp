#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "scalelab/rng.hpp"
#include "scalelab/simulator.hpp"
#include "scalelab/workload.hpp"

using namespace scalelab;

namespace {

SimulatorConfig one_cpu_stage(double mu, double lambda, std::uint64_t seed) {
    SimulatorConfig cfg;
    StageSpec s;
    s.name = "stage0";
    s.kind = StageKind::Cpu;
    s.base_service_rate = mu;
    cfg.stages = {s};
    cfg.initial = {ResourceConfig{}};
    cfg.workload.kind = WorkloadKind::Poisson;
    cfg.workload.base_rate = lambda;
    cfg.workload.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("nearest-rank percentile") {
    std::vector<double> ladder;
    for (int i = 1; i <= 100; ++i) ladder.push_back(10.0 * i);
    CHECK(sample_percentile(ladder, 99.0) == 990.0);
    CHECK(sample_percentile(ladder, 100.0) == 1000.0);
    CHECK(sample_percentile(ladder, 50.0) == 500.0);
    CHECK(sample_percentile({42.0}, 1.0) == 42.0);
    CHECK(sample_percentile({42.0}, 99.0) == 42.0);
    CHECK_THROWS_AS(sample_percentile({}, 99.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_percentile({1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_percentile({1.0}, 100.5), std::invalid_argument);

    // independent oracle: index arithmetic on a shuffled sample set
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> unif(0.0, 500.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + gen() % 300;
        std::vector<double> xs(n);
        for (auto& x : xs) x = unif(gen);
        double p = 0.5 + 99.5 * unif(gen) / 500.0;
        std::vector<double> sorted = xs;
        std::sort(sorted.begin(), sorted.end());
        std::size_t rank = static_cast<std::size_t>(
            std::ceil(p / 100.0 * static_cast<double>(n) - 1e-9));
        rank = std::max<std::size_t>(rank, 1);
        CHECK(sample_percentile(xs, p) == sorted[rank - 1]);
    }
}

TEST_CASE("workload generators") {
    WorkloadPattern ramp;
    ramp.kind = WorkloadKind::Ramp;
    ramp.base_rate = 10.0;
    ramp.ramp_slope = 1.0;
    CHECK(instantaneous_rate(ramp, 30.0) == 40.0);
    // tick mean is the exact integral of the linear rate
    CHECK(mean_arrivals(ramp, 0.0, 1.0) == doctest::Approx(10.5));

    WorkloadPattern burst;
    burst.kind = WorkloadKind::Burst;
    burst.base_rate = 10.0;
    burst.burst_amplitude = 3.0;
    burst.burst_period_s = 10.0;
    burst.burst_duty = 0.25;  // bursts cover [0, 2.5) of each period
    CHECK(instantaneous_rate(burst, 1.0) == 30.0);
    CHECK(instantaneous_rate(burst, 5.0) == 10.0);
    CHECK(mean_arrivals(burst, 2.0, 1.0) == doctest::Approx(10.0 * (0.5 + 3.0 * 0.5)));

    // law of large numbers on the Poisson draw
    WorkloadPattern po;
    po.base_rate = 100.0;
    Rng rng(99);
    double total = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) total += generate_arrivals(po, 0.0, 1.0, rng);
    CHECK(std::abs(total / draws - 100.0) / 100.0 < 0.03);
}

TEST_CASE("burst with amplitude 1 reproduces the poisson stream") {
    auto cfg_a = one_cpu_stage(10.0, 5.0, 42);
    auto cfg_b = cfg_a;
    cfg_b.workload.kind = WorkloadKind::Burst;
    cfg_b.workload.burst_amplitude = 1.0;
    cfg_b.workload.burst_period_s = 7.0;
    Simulator a(cfg_a), b(cfg_b);
    a.begin_window();
    b.begin_window();
    a.step(50.0);
    b.step(50.0);
    CHECK(a.total_arrivals() == b.total_arrivals());
    CHECK(a.total_completions() == b.total_completions());
    REQUIRE(a.window_latency_samples().size() == b.window_latency_samples().size());
    for (std::size_t i = 0; i < a.window_latency_samples().size(); ++i)
        CHECK(a.window_latency_samples()[i] == b.window_latency_samples()[i]);
}

TEST_CASE("no arrivals means idle queues and zeroed window metrics") {
    auto cfg = one_cpu_stage(10.0, 1e-12, 5);
    Simulator sim(cfg);
    sim.begin_window();
    sim.step(100.0);
    auto st = sim.snapshot();
    CHECK(sim.total_arrivals() == 0);
    CHECK(st.stages[0].queue_depth == 0.0);
    CHECK(st.stages[0].u_cpu == 0.0);
    CHECK(st.stages[0].completions == 0);
    CHECK(st.latency_p99_ms == 0.0);
}

TEST_CASE("light load: end-to-end latency is essentially pure service time") {
    auto cfg = one_cpu_stage(10.0, 0.05, 11);
    Simulator sim(cfg);
    sim.begin_window();
    sim.step(4000.0);
    auto st = sim.snapshot();
    REQUIRE(st.stages[0].completions > 50);
    CHECK(st.latency_p99_ms >= st.stages[0].proc_ms_p99);  // decomposition bound
    CHECK(sim.run_mean_queue_delay_s(0) < 0.002);  // analytic W_q ~ 0.5 ms here
}

TEST_CASE("mm1 mean queueing delay matches the analytic value") {
    // lambda=5, mu=10: W_q = rho/(mu-lambda) = 0.1 s
    auto cfg = one_cpu_stage(10.0, 5.0, 1234);
    Simulator sim(cfg);
    double horizon = 0.0;
    while (sim.run_stage_completions(0) < 100000) {
        sim.step(500.0);
        horizon += 500.0;
        REQUIRE(horizon < 40000.0);
    }
    CHECK(std::abs(sim.run_mean_queue_delay_s(0) - 0.1) / 0.1 < 0.05);
}

TEST_CASE("conservation with a bounded queue under overload") {
    auto cfg = one_cpu_stage(10.0, 30.0, 77);
    cfg.stages[0].queue_capacity = 3;
    Simulator sim(cfg);
    for (int k = 0; k < 10; ++k) {
        sim.step(20.0);
        CHECK(sim.total_arrivals() ==
              sim.total_completions() + sim.total_drops() + sim.in_flight());
    }
    CHECK(sim.total_drops() > 0);
    CHECK(sim.total_completions() > 0);
}

TEST_CASE("slowest stage shows the highest utilization and queue depth") {
    SimulatorConfig cfg;
    for (int i = 0; i < 3; ++i) {
        StageSpec s;
        s.name = "s" + std::to_string(i);
        s.base_service_rate = (i == 1) ? 10.0 : 20.0;
        cfg.stages.push_back(s);
        cfg.initial.push_back(ResourceConfig{});
    }
    cfg.workload.base_rate = 9.0;
    cfg.workload.seed = 21;
    Simulator sim(cfg);
    sim.step(60.0);
    sim.begin_window();
    sim.step(120.0);
    auto st = sim.snapshot();
    std::size_t umax = 0, qmax = 0;
    for (std::size_t i = 1; i < 3; ++i) {
        if (st.stages[i].u_cpu > st.stages[umax].u_cpu) umax = i;
        if (st.stages[i].queue_depth > st.stages[qmax].queue_depth) qmax = i;
    }
    CHECK(umax == 1);
    CHECK(qmax == 1);
}

TEST_CASE("adding a replica weakly reduces stage queueing delay") {
    auto run = [](int replicas) {
        auto cfg = one_cpu_stage(10.0, 8.0, 3131);
        cfg.initial[0].replicas = replicas;
        Simulator sim(cfg);
        sim.step(3000.0);
        return sim.run_mean_queue_delay_s(0);
    };
    double w1 = run(1), w2 = run(2), w3 = run(3);
    CHECK(w2 < w1);
    CHECK(w3 <= w2);
}

TEST_CASE("scale-up waits out the startup delay, scale-down is immediate") {
    auto cfg = one_cpu_stage(10.0, 15.0, 909);  // overloaded on one replica
    Simulator sim(cfg);
    ScalingAction up = ScalingAction::noop(1);
    up.stages[0].replicas = 2;
    sim.apply(up);
    sim.begin_window();
    sim.step(14.0);  // still provisioning
    auto before = sim.snapshot();
    CHECK(before.stages[0].u_cpu > 0.95);
    sim.step(30.0);
    sim.begin_window();
    sim.step(30.0);
    auto after = sim.snapshot();
    CHECK(after.stages[0].u_cpu < 0.9);
    CHECK(after.throughput_rps > 12.0);

    ScalingAction down = ScalingAction::noop(1);
    down.stages[0].replicas = -2;
    sim.apply(down);
    CHECK(sim.resources()[0].replicas == 1);
    sim.begin_window();
    sim.step(30.0);
    CHECK(sim.snapshot().stages[0].u_cpu > 0.9);  // back to saturation
}

TEST_CASE("cpu allocation shifts the service rate") {
    auto cfg = one_cpu_stage(10.0, 6.0, 404);
    cfg.initial[0].cpu_millicores = 500;  // multiplier 0.5 -> mu = 5 < lambda
    Simulator sim(cfg);
    sim.begin_window();
    sim.step(60.0);
    CHECK(sim.snapshot().stages[0].u_cpu > 0.95);
    ScalingAction more = ScalingAction::noop(1);
    more.stages[0].cpu_millicores = 500;  // back to reference: mu = 10
    sim.apply(more);
    sim.step(60.0);
    sim.begin_window();
    sim.step(120.0);
    CHECK(sim.snapshot().stages[0].u_cpu < 0.85);
}

TEST_CASE("gpu throttle caps throughput at the quota share") {
    SimulatorConfig cfg;
    StageSpec s;
    s.name = "gpu";
    s.kind = StageKind::Gpu;
    s.base_service_rate = 200.0;  // 5 ms kernels
    cfg.stages = {s};
    ResourceConfig r;
    r.rate_ratio = 0.1;  // one 100-block launch per 10 ms window
    cfg.initial = {r};
    cfg.workload.base_rate = 500.0;  // far beyond the admitted 100/s
    cfg.workload.seed = 66;
    Simulator sim(cfg);
    sim.step(10.0);
    sim.begin_window();
    sim.step(20.0);
    auto st = sim.snapshot();
    CHECK(st.throughput_rps == doctest::Approx(100.0).epsilon(0.03));
    CHECK(st.stages[0].u_gpu_quota == 1.0);
    CHECK(st.stages[0].queue_delay_ms_p99 > 0.0);

    // lifting the quota restores headroom
    SimulatorConfig cfg2 = cfg;
    cfg2.initial[0].rate_ratio = 1.0;
    cfg2.workload.base_rate = 80.0;
    Simulator free_run(cfg2);
    free_run.step(10.0);
    free_run.begin_window();
    free_run.step(20.0);
    auto st2 = free_run.snapshot();
    CHECK(st2.throughput_rps == doctest::Approx(80.0).epsilon(0.1));
    CHECK(st2.stages[0].u_gpu_quota < 0.75);
}

TEST_CASE("rate-ratio actions reach the throttle") {
    SimulatorConfig cfg;
    StageSpec s;
    s.kind = StageKind::Gpu;
    s.base_service_rate = 50.0;
    cfg.stages = {s};
    cfg.initial = {ResourceConfig{}};
    cfg.workload.base_rate = 10.0;
    cfg.workload.seed = 8;
    Simulator sim(cfg);
    ScalingAction a = ScalingAction::noop(1);
    a.stages[0].rate_ratio_tenths = -1;
    sim.apply(a);
    CHECK(sim.resources()[0].rate_ratio == doctest::Approx(0.9));
    sim.step(1.0);
    CHECK(sim.bucket(0)->rate_ratio() == doctest::Approx(0.9));
    // repeated tenth-steps stay exact
    for (int i = 0; i < 5; ++i) sim.apply(a);
    CHECK(sim.resources()[0].rate_ratio == doctest::Approx(0.4));
}

TEST_CASE("identical seeds give identical runs, and copies continue identically") {
    auto cfg = one_cpu_stage(12.0, 9.0, 5150);
    Simulator a(cfg), b(cfg);
    a.step(40.0);
    b.step(40.0);
    CHECK(a.total_arrivals() == b.total_arrivals());
    CHECK(a.total_completions() == b.total_completions());

    Simulator c = a;  // clone mid-run
    a.begin_window();
    c.begin_window();
    a.step(25.0);
    c.step(25.0);
    auto sa = a.snapshot(), sc = c.snapshot();
    CHECK(sa.latency_p99_ms == sc.latency_p99_ms);
    CHECK(sa.throughput_rps == sc.throughput_rps);
    CHECK(a.total_arrivals() == c.total_arrivals());
}
