#include "scalelab/token_bucket.hpp"

#include <cmath>
#include <stdexcept>

namespace scalelab {

TokenBucket::TokenBucket(Config cfg) : cfg_(cfg), rho_(cfg.rate_ratio) {
    if (cfg_.t_max <= 0 || cfg_.window_ms <= 0)
        throw std::invalid_argument("token bucket: t_max and window_ms must be positive");
    if (rho_ < 0.0 || rho_ > 1.0)
        throw std::invalid_argument("token bucket: rate_ratio outside [0,1]");
    tokens_ = grant_per_window();  // window 0 opens with its grant
    granted_ = tokens_;
}

TokenBucket::Launch TokenBucket::try_launch(double grid_blocks, std::uint64_t payload) {
    if (grid_blocks <= 0)
        throw std::invalid_argument("token bucket: grid_blocks must be positive");
    Launch res;
    res.oversized = grid_blocks > cfg_.t_max;
    if (queue_.empty() && tokens_ >= grid_blocks) {
        tokens_ -= grid_blocks;
        admitted_ += grid_blocks;
        res.admitted = true;
        res.ticket = next_ticket_++;
        return res;
    }
    // FIFO: even an affordable launch waits behind earlier blocked work.
    res.ticket = next_ticket_++;
    queue_.push_back({res.ticket, payload, grid_blocks, grid_blocks});
    return res;
}

std::vector<TokenBucket::Admission> TokenBucket::refill() {
    ++window_index_;
    apply_pending_rate();
    tokens_ = grant_per_window();
    granted_ += tokens_;
    return drain_queue();
}

std::vector<TokenBucket::Admission> TokenBucket::drain_queue() {
    std::vector<Admission> out;
    while (!queue_.empty()) {
        Blocked& head = queue_.front();
        if (head.remaining <= tokens_) {
            tokens_ -= head.remaining;
            admitted_ += head.blocks;
            out.push_back({head.ticket, head.payload});
            queue_.pop_front();
        } else {
            // Put the whole balance toward the head so large launches make
            // progress every window instead of starving.
            head.remaining -= tokens_;
            tokens_ = 0.0;
            break;
        }
    }
    return out;
}

void TokenBucket::set_rate(double rho) {
    if (rho < cfg_.rate_min || rho > 1.0)
        throw std::invalid_argument("token bucket: rate outside [rate_min, 1]");
    pending_rho_ = rho;
}

void TokenBucket::apply_pending_rate() {
    if (pending_rho_ >= 0.0) {
        rho_ = pending_rho_;
        pending_rho_ = -1.0;
    }
}

void TokenBucket::advance_idle_to_ms(double now_ms) {
    if (!queue_.empty())
        throw std::logic_error("token bucket: advance_idle_to_ms with blocked work");
    auto target = static_cast<std::int64_t>(std::floor(now_ms / cfg_.window_ms));
    if (target <= window_index_) return;
    std::int64_t crossed = target - window_index_;
    window_index_ = target;
    apply_pending_rate();
    tokens_ = grant_per_window();
    granted_ += crossed * tokens_;
}

double quota_utilization(double u_actual, double rho, double rho_min) {
    if (rho < rho_min)
        throw std::invalid_argument("quota_utilization: rho below minimum");
    return std::min(1.0, u_actual / rho);
}

}  // namespace scalelab
