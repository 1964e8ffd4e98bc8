#include "scalelab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace scalelab {

double sample_percentile(std::vector<double> samples, double p) {
    if (samples.empty()) throw std::invalid_argument("sample_percentile: no samples");
    if (p <= 0.0 || p > 100.0)
        throw std::invalid_argument("sample_percentile: p outside (0, 100]");
    std::sort(samples.begin(), samples.end());
    // nearest rank, with a small slack so exact multiples don't round up
    double q = p * static_cast<double>(samples.size()) / 100.0;
    auto idx = static_cast<std::size_t>(std::ceil(q - 1e-9));
    idx = std::clamp<std::size_t>(idx, 1, samples.size());
    return samples[idx - 1];
}

Simulator::Simulator(SimulatorConfig cfg)
    : cfg_(std::move(cfg)),
      rng_(cfg_.seed != 0 ? cfg_.seed : cfg_.workload.seed) {
    if (cfg_.stages.empty() || cfg_.stages.size() != cfg_.initial.size())
        throw std::invalid_argument("simulator: stage specs and initial configs must align");
    if (cfg_.tick_s <= 0) throw std::invalid_argument("simulator: tick_s must be positive");
    resources_ = cfg_.initial;
    stages_.resize(cfg_.stages.size());
    for (std::size_t i = 0; i < stages_.size(); ++i) {
        const StageSpec& spec = cfg_.stages[i];
        if (spec.base_service_rate <= 0)
            throw std::invalid_argument("simulator: base_service_rate must be positive");
        ResourceConfig& res = resources_[i];
        res.replicas = std::max(1, res.replicas);
        StageRuntime& st = stages_[i];
        st.active = res.replicas;
        if (spec.kind == StageKind::Gpu) {
            st.rate_tenths = std::clamp<int>(
                static_cast<int>(std::llround(res.rate_ratio * 10.0)), 1, 10);
            res.rate_ratio = st.rate_tenths / 10.0;
            TokenBucket::Config bc;
            bc.rate_ratio = res.rate_ratio;
            bc.t_max = cfg_.bucket_t_max;
            bc.window_ms = cfg_.bucket_window_ms;
            st.bucket.emplace(bc);
        } else {
            st.rate_tenths = 10;
            res.rate_ratio = 1.0;
        }
    }
}

void Simulator::push_event(double t, EventKind kind, std::uint32_t stage, std::uint32_t req) {
    events_.push(Event{t, next_seq_++, kind, stage, req});
}

std::uint32_t Simulator::alloc_request() {
    if (!free_ids_.empty()) {
        std::uint32_t id = free_ids_.back();
        free_ids_.pop_back();
        return id;
    }
    pool_.emplace_back();
    return static_cast<std::uint32_t>(pool_.size() - 1);
}

void Simulator::free_request(std::uint32_t id) { free_ids_.push_back(id); }

void Simulator::generate_ticks_until(double end_s) {
    while (tick_index_ * cfg_.tick_s < end_s) {
        double t0 = tick_index_ * cfg_.tick_s;
        for (double at : arrival_times(cfg_.workload, t0, cfg_.tick_s, rng_))
            push_event(at, EventKind::Arrival, 0, 0);
        ++tick_index_;
    }
}

void Simulator::step(double dt_s) {
    if (dt_s <= 0) throw std::invalid_argument("simulator: step dt must be positive");
    double end = now_s_ + dt_s;
    generate_ticks_until(end);
    while (!events_.empty() && events_.top().t < end) {
        Event ev = events_.top();
        events_.pop();
        now_s_ = ev.t;
        process(ev);
    }
    now_s_ = end;
}

void Simulator::process(const Event& ev) {
    switch (ev.kind) {
        case EventKind::Arrival: {
            std::uint32_t id = alloc_request();
            pool_[id] = Request{ev.t, ev.t, 0.0, 0.0};
            ++total_arrivals_;
            ++in_flight_;
            arrive(0, id, ev.t);
            break;
        }
        case EventKind::Complete:
            complete(ev.stage, ev.req, ev.t);
            break;
        case EventKind::ReplicaReady: {
            StageRuntime& st = stages_[ev.stage];
            if (st.cancel > 0) {
                --st.cancel;  // activation was revoked by a scale-down
                break;
            }
            accum(st, ev.t);
            --st.pending;
            ++st.active;
            dispatch(ev.stage, ev.t);
            break;
        }
        case EventKind::Refill: {
            StageRuntime& st = stages_[ev.stage];
            st.refill_scheduled = false;
            if (!st.bucket) break;
            accum(st, ev.t);
            for (const auto& adm : st.bucket->refill())
                start_exec(ev.stage, static_cast<std::uint32_t>(adm.payload), ev.t);
            if (st.bucket->has_blocked()) {
                push_event(st.bucket->next_boundary_ms() / 1000.0, EventKind::Refill,
                           ev.stage, 0);
                st.refill_scheduled = true;
            }
            break;
        }
    }
}

void Simulator::arrive(std::uint32_t stage, std::uint32_t req, double t) {
    StageRuntime& st = stages_[stage];
    accum(st, t);
    ++st.win_arrivals;
    pool_[req].stage_arrival_s = t;
    const StageSpec& spec = cfg_.stages[stage];
    if (spec.queue_capacity > 0 && st.busy >= st.active &&
        st.waiting.size() >= spec.queue_capacity) {
        ++st.win_drops;
        ++total_drops_;
        --in_flight_;
        free_request(req);
        return;
    }
    st.waiting.push_back(req);
    dispatch(stage, t);
}

// Callers must have run accum(st, t) already (every event handler does).
void Simulator::dispatch(std::uint32_t stage, double t) {
    StageRuntime& st = stages_[stage];
    while (st.busy < st.active && !st.waiting.empty()) {
        std::uint32_t req = st.waiting.front();
        st.waiting.pop_front();
        ++st.busy;
        if (st.bucket) {
            if (!st.bucket->has_blocked())
                st.bucket->advance_idle_to_ms(t * 1000.0);
            auto launch =
                st.bucket->try_launch(cfg_.stages[stage].gpu_blocks_per_request, req);
            if (launch.admitted) {
                start_exec(stage, req, t);
            } else if (!st.refill_scheduled) {
                push_event(st.bucket->next_boundary_ms() / 1000.0, EventKind::Refill,
                           stage, 0);
                st.refill_scheduled = true;
            }
        } else {
            start_exec(stage, req, t);
        }
    }
}

void Simulator::start_exec(std::uint32_t stage, std::uint32_t req, double t) {
    StageRuntime& st = stages_[stage];
    ++st.exec;
    Request& r = pool_[req];
    r.queue_delay_s = t - r.stage_arrival_s;
    double rate = per_replica_rate(cfg_.stages[stage], resources_[stage]);
    r.service_s = rng_.exponential(rate);
    push_event(t + r.service_s, EventKind::Complete, stage, req);
}

void Simulator::complete(std::uint32_t stage, std::uint32_t req, double t) {
    StageRuntime& st = stages_[stage];
    accum(st, t);
    --st.busy;
    --st.exec;
    ++st.win_completions;
    ++st.cum_completions;
    const Request& r = pool_[req];
    st.win_qdelay_ms.push_back(r.queue_delay_s * 1000.0);
    st.win_proc_ms.push_back(r.service_s * 1000.0);
    st.cum_qdelay_s += r.queue_delay_s;
    dispatch(stage, t);
    if (stage + 1 < stages_.size()) {
        arrive(stage + 1, req, t);
    } else {
        win_e2e_ms_.push_back((t - r.arrival_s) * 1000.0);
        ++total_completions_;
        --in_flight_;
        free_request(req);
    }
}

void Simulator::accum(StageRuntime& st, double t) {
    double dt = t - st.last_accum_s;
    if (dt > 0) {
        st.busy_time += st.busy * dt;
        st.exec_time += st.exec * dt;
        st.cap_time += st.active * dt;
        st.queue_time += static_cast<double>(st.waiting.size()) * dt;
    }
    st.last_accum_s = t;
}

void Simulator::begin_window() {
    for (auto& st : stages_) {
        accum(st, now_s_);
        st.busy_time = st.exec_time = st.cap_time = st.queue_time = 0.0;
        st.win_arrivals = st.win_completions = st.win_drops = 0;
        st.win_proc_ms.clear();
        st.win_qdelay_ms.clear();
    }
    win_e2e_ms_.clear();
    window_start_s_ = now_s_;
}

PipelineState Simulator::snapshot() const {
    PipelineState out;
    out.t_s = now_s_;
    double len = now_s_ - window_start_s_;
    out.stages.reserve(stages_.size());
    for (std::size_t i = 0; i < stages_.size(); ++i) {
        const StageRuntime& st = stages_[i];
        double tail = now_s_ - st.last_accum_s;
        double busy_time = st.busy_time + st.busy * tail;
        double exec_time = st.exec_time + st.exec * tail;
        double cap_time = st.cap_time + st.active * tail;
        double queue_time = st.queue_time + static_cast<double>(st.waiting.size()) * tail;
        StageSnapshot s;
        s.name = cfg_.stages[i].name;
        s.kind = cfg_.stages[i].kind;
        s.config = resources_[i];
        s.queue_depth = len > 0 ? queue_time / len : 0.0;
        s.u_cpu = cap_time > 0 ? std::clamp(busy_time / cap_time, 0.0, 1.0) : 0.0;
        if (st.bucket) {
            double raw = cap_time > 0 ? std::clamp(exec_time / cap_time, 0.0, 1.0) : 0.0;
            s.u_gpu_quota = quota_utilization(raw, st.rate_tenths / 10.0);
        }
        if (!st.win_proc_ms.empty()) {
            s.proc_ms_mean = std::accumulate(st.win_proc_ms.begin(), st.win_proc_ms.end(), 0.0) /
                             static_cast<double>(st.win_proc_ms.size());
            s.proc_ms_p99 = sample_percentile(st.win_proc_ms, 99.0);
        }
        if (!st.win_qdelay_ms.empty()) {
            s.queue_delay_ms_mean =
                std::accumulate(st.win_qdelay_ms.begin(), st.win_qdelay_ms.end(), 0.0) /
                static_cast<double>(st.win_qdelay_ms.size());
            s.queue_delay_ms_p99 = sample_percentile(st.win_qdelay_ms, 99.0);
        }
        s.arrivals = st.win_arrivals;
        s.completions = st.win_completions;
        s.drops = st.win_drops;
        out.stages.push_back(std::move(s));
    }
    if (!win_e2e_ms_.empty()) {
        out.latency_mean_ms = std::accumulate(win_e2e_ms_.begin(), win_e2e_ms_.end(), 0.0) /
                              static_cast<double>(win_e2e_ms_.size());
        out.latency_p99_ms = sample_percentile(win_e2e_ms_, 99.0);
    }
    if (len > 0 && !stages_.empty())
        out.throughput_rps = static_cast<double>(stages_.back().win_completions) / len;
    return out;
}

void Simulator::apply(const ScalingAction& action) {
    if (action.stages.size() != stages_.size())
        throw std::invalid_argument("simulator: action arity mismatch");
    for (std::size_t i = 0; i < stages_.size(); ++i) {
        const StageDelta& d = action.stages[i];
        StageRuntime& st = stages_[i];
        ResourceConfig& res = resources_[i];
        accum(st, now_s_);
        if (d.replicas > 0) {
            st.pending += d.replicas;
            res.replicas += d.replicas;
            for (int k = 0; k < d.replicas; ++k)
                push_event(now_s_ + cfg_.stages[i].startup_delay_s, EventKind::ReplicaReady,
                           static_cast<std::uint32_t>(i), 0);
        } else if (d.replicas < 0) {
            int k = std::min(-d.replicas, res.replicas - 1);
            int from_pending = std::min(k, st.pending);
            st.pending -= from_pending;
            st.cancel += from_pending;
            st.active -= k - from_pending;
            res.replicas -= k;
        }
        if (d.cpu_millicores != 0)
            res.cpu_millicores = std::max(100, res.cpu_millicores + d.cpu_millicores);
        if (d.memory_mb != 0) res.memory_mb = std::max(64, res.memory_mb + d.memory_mb);
        if (d.rate_ratio_tenths != 0 && st.bucket) {
            st.rate_tenths = std::clamp(st.rate_tenths + d.rate_ratio_tenths, 1, 10);
            res.rate_ratio = st.rate_tenths / 10.0;
            st.bucket->set_rate(res.rate_ratio);
        }
    }
}

double Simulator::run_mean_queue_delay_s(std::size_t stage) const {
    const StageRuntime& st = stages_.at(stage);
    if (st.cum_completions == 0) return 0.0;
    return st.cum_qdelay_s / static_cast<double>(st.cum_completions);
}

std::uint64_t Simulator::run_stage_completions(std::size_t stage) const {
    return stages_.at(stage).cum_completions;
}

const TokenBucket* Simulator::bucket(std::size_t stage) const {
    const StageRuntime& st = stages_.at(stage);
    return st.bucket ? &*st.bucket : nullptr;
}

}  // namespace scalelab
