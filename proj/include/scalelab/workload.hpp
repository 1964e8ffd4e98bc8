#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "scalelab/rng.hpp"
#include "scalelab/types.hpp"

namespace scalelab {

inline bool in_burst_window(const WorkloadPattern& w, double t_s) {
    double phase = std::fmod(t_s, w.burst_period_s);
    if (phase < 0) phase += w.burst_period_s;
    return phase < w.burst_duty * w.burst_period_s;
}

inline double instantaneous_rate(const WorkloadPattern& w, double t_s) {
    switch (w.kind) {
        case WorkloadKind::Poisson: return w.base_rate;
        case WorkloadKind::Ramp: return w.base_rate + w.ramp_slope * t_s;
        case WorkloadKind::Burst:
            return w.base_rate * (in_burst_window(w, t_s) ? w.burst_amplitude : 1.0);
    }
    return w.base_rate;
}

// Expected arrivals over [t, t+dt). Exact for all three shapes: midpoint rule
// is the integral for the linear ramp, and the burst overlap is computed
// piecewise so ticks straddling a burst edge stay unbiased.
inline double mean_arrivals(const WorkloadPattern& w, double t_s, double dt_s) {
    switch (w.kind) {
        case WorkloadKind::Poisson: return w.base_rate * dt_s;
        case WorkloadKind::Ramp: {
            double rate_mid = w.base_rate + w.ramp_slope * (t_s + 0.5 * dt_s);
            return std::max(0.0, rate_mid) * dt_s;
        }
        case WorkloadKind::Burst: {
            double burst_len = w.burst_duty * w.burst_period_s;
            double overlap = 0.0;
            double first = std::floor(t_s / w.burst_period_s) * w.burst_period_s;
            for (double start = first; start < t_s + dt_s; start += w.burst_period_s) {
                double lo = std::max(t_s, start);
                double hi = std::min(t_s + dt_s, start + burst_len);
                overlap += std::max(0.0, hi - lo);
            }
            return w.base_rate * ((dt_s - overlap) + w.burst_amplitude * overlap);
        }
    }
    return w.base_rate * dt_s;
}

inline int generate_arrivals(const WorkloadPattern& w, double t_s, double dt_s, Rng& rng) {
    return rng.poisson(mean_arrivals(w, t_s, dt_s));
}

// Arrival instants within the tick: Poisson count, then sorted uniform
// placement, which reproduces a Poisson process on the tick.
inline std::vector<double> arrival_times(const WorkloadPattern& w, double t_s, double dt_s,
                                         Rng& rng) {
    int count = generate_arrivals(w, t_s, dt_s, rng);
    std::vector<double> times(static_cast<std::size_t>(count));
    for (auto& x : times) x = t_s + rng.uniform() * dt_s;
    std::sort(times.begin(), times.end());
    return times;
}

}  // namespace scalelab
