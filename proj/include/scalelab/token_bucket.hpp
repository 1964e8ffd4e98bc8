#pragma once

#include <cstdint>
#include <deque>
#include <vector>

namespace scalelab {

// Windowed token bucket modeling GPU kernel-launch throttling. Every
// window_ms the balance resets to t_max * rate_ratio (no carry-over of unused
// tokens); launches consume tokens proportional to their grid blocks and
// block FIFO when the balance runs out. A blocked head larger than one
// window's grant absorbs whole grants across windows, so oversized work is
// delayed but never starved. Rate changes apply at the next window boundary.
class TokenBucket {
public:
    struct Config {
        double rate_ratio = 1.0;
        double t_max = 1000.0;
        double window_ms = 10.0;
        double rate_min = 0.1;
    };

    struct Launch {
        bool admitted = false;
        bool oversized = false;  // grid_blocks > t_max: multi-window admission
        std::uint64_t ticket = 0;
    };

    struct Admission {
        std::uint64_t ticket = 0;
        std::uint64_t payload = 0;
    };

    explicit TokenBucket(Config cfg);

    // Attempt a launch within the current window. Blocks (enqueues) if the
    // balance is short or anything is already waiting.
    Launch try_launch(double grid_blocks, std::uint64_t payload = 0);

    // Advance one window: apply any pending rate, reset the balance to the
    // grant, and admit blocked work FIFO. Returns what got admitted.
    std::vector<Admission> refill();

    // Stage a new rate ratio for the next refill. Throws std::invalid_argument
    // outside [rate_min, 1].
    void set_rate(double rho);

    // Fast-forward to the window containing now_ms. Only legal while nothing
    // is blocked (callers drive refill() explicitly when work is waiting, so
    // admission times stay observable).
    void advance_idle_to_ms(double now_ms);

    double next_boundary_ms() const { return (window_index_ + 1) * cfg_.window_ms; }
    bool has_blocked() const { return !queue_.empty(); }
    std::size_t blocked_count() const { return queue_.size(); }
    double tokens() const { return tokens_; }
    double rate_ratio() const { return rho_; }
    double grant_per_window() const { return cfg_.t_max * rho_; }
    const Config& config() const { return cfg_; }

    // Cumulative work-unit accounting; admitted never exceeds granted.
    double granted_work() const { return granted_; }
    double admitted_work() const { return admitted_; }

private:
    struct Blocked {
        std::uint64_t ticket;
        std::uint64_t payload;
        double blocks;     // original size
        double remaining;  // still-unpaid portion
    };

    void apply_pending_rate();
    std::vector<Admission> drain_queue();

    Config cfg_;
    double rho_;
    double pending_rho_ = -1.0;  // <0 = none
    double tokens_;
    std::int64_t window_index_ = 0;
    std::deque<Blocked> queue_;
    std::uint64_t next_ticket_ = 1;
    double granted_ = 0.0;
    double admitted_ = 0.0;
};

// Quota-relative utilization: raw GPU busy fraction scaled by the admission
// quota and clamped, so 1.0 means "using everything the quota allows".
double quota_utilization(double u_actual, double rho, double rho_min = 0.1);

}  // namespace scalelab
