#pragma once

#include <optional>
#include <vector>

namespace scalelab {

// One operating point in normalized objective space: (latency, cost), both in
// [0, 1], smaller is better on both axes.
struct ObjectivePoint {
    double latency = 0.0;
    double cost = 0.0;

    friend bool operator==(const ObjectivePoint&, const ObjectivePoint&) = default;
};

// True iff p is at least as good as q on both axes and strictly better on one.
bool dominates(const ObjectivePoint& p, const ObjectivePoint& q);

// Set of mutually non-dominated (latency, cost) points, kept sorted by latency.
// Hypervolume is measured toward the reference point (1, 1). Normalizers map
// raw metrics (ms, $/interval) onto the unit square; values past the
// normalizer clamp to 1 and are flagged.
class ParetoFrontier {
public:
    ParetoFrontier(double latency_max_ms, double cost_max);

    struct UpdateResult {
        bool inserted = false;
        bool clamped = false;
    };

    // Insert the normalized image of (latency_ms, cost) if non-dominated;
    // points it dominates are removed. Re-inserting an existing point is a
    // no-op.
    UpdateResult update(double latency_ms, double cost);

    ObjectivePoint normalize(double latency_ms, double cost, bool* clamped = nullptr) const;

    bool strictly_dominated(const ObjectivePoint& p) const;

    // Area covered between the frontier and the reference point (1,1).
    double hypervolume() const;

    // Exclusive hypervolume a non-dominated point would add. Calling this
    // with a dominated point is a contract violation.
    double contribution(const ObjectivePoint& p) const;

    // Min Euclidean distance from p to the frontier's points. Empty frontier
    // has no distance.
    std::optional<double> distance(const ObjectivePoint& p) const;

    // Shaped frontier value: non-dominated points earn 1 + contribution,
    // dominated points earn 0.8 / (1 + distance). Always in [0, 2].
    double reward(const ObjectivePoint& p) const;

    // Insert an already-normalized point; same dominance rules as update().
    bool insert_normalized(const ObjectivePoint& p);

    const std::vector<ObjectivePoint>& points() const { return points_; }
    bool empty() const { return points_.empty(); }
    std::size_t size() const { return points_.size(); }
    double latency_max_ms() const { return latency_max_ms_; }
    double cost_max() const { return cost_max_; }

private:
    std::vector<ObjectivePoint> points_;  // sorted by latency asc, cost desc
    double latency_max_ms_;
    double cost_max_;
};

}  // namespace scalelab
