#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scalelab/action.hpp"
#include "scalelab/types.hpp"

namespace scalelab {

// Fixed-order context features: per stage [n, c, m, rho, queue_depth, u_cpu,
// u_gpu], then [L_p99, throughput].
std::vector<double> context_features(const PipelineState& state);

// Gaussian kernel on already-standardized vectors. Throws on length mismatch.
double similarity(const std::vector<double>& a, const std::vector<double>& b, double sigma);

struct Experience {
    std::vector<double> context;  // raw (unstandardized) features
    ScalingAction action;
    double reward = 0.0;
    int round = 0;
    std::string source = "llm";  // "llm" or "probe"
};

struct SelectionConfig {
    std::size_t m = 15;
    double lambda_div = 0.1;
    double sigma_sim = 0.0;  // 0 = median pairwise distance of the buffer
    bool locally_weighted_mean = false;
};

// One retrieved episode plus the relevance diagnostics the policy layer uses.
struct SelectedExperience {
    Experience experience;
    double similarity_to_current = 0.0;
    double score = 0.0;
};

// Reward-gated episode memory. Only episodes with reward above the floor are
// kept; rejections are counted. Kernel distances run on z-scored features
// using the buffer's own running statistics (zero-variance dims pass
// through), so mixed units don't swamp the kernel.
class ExperienceBuffer {
public:
    explicit ExperienceBuffer(double r_min = 0.0);

    bool store(Experience e);  // false (and counted) when reward <= r_min
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    std::uint64_t rejected() const { return rejected_; }
    double r_min() const { return r_min_; }
    const std::vector<Experience>& all() const { return items_; }

    std::vector<double> standardize(const std::vector<double>& x) const;

    // Bandwidth actually used for kernels: the configured value, or the
    // cached median pairwise distance (refreshed every 50 insertions).
    double effective_sigma(const SelectionConfig& cfg) const;

    // Kernel-weighted novelty of one stored episode against the current
    // context: similarity times the leave-one-out reward residual.
    double surprisal(std::size_t index, const std::vector<double>& x_curr,
                     const SelectionConfig& cfg) const;

    // Greedy diversity-regularized pick of up to M episodes, returned in
    // reward-ascending order. Deterministic: ties go to the lower round.
    std::vector<SelectedExperience> select(const std::vector<double>& x_curr,
                                           const SelectionConfig& cfg) const;

    // Line-delimited JSON persistence. load() skips corrupt lines and
    // reports how many.
    void persist(const std::string& path) const;
    static ExperienceBuffer load(const std::string& path, double r_min,
                                 std::size_t* corrupt_lines = nullptr);

private:
    double loo_mean(std::size_t index, const SelectionConfig& cfg) const;
    void refresh_sigma_cache() const;

    std::vector<Experience> items_;
    double r_min_;
    std::uint64_t rejected_ = 0;
    // per-dimension running sums for z-scoring
    std::vector<double> sum_, sum_sq_;
    mutable double cached_sigma_ = 0.0;
    mutable std::size_t sigma_stale_count_ = 0;  // insertions since last refresh
};

}  // namespace scalelab
