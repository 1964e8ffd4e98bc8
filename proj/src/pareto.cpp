#include "scalelab/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scalelab {

bool dominates(const ObjectivePoint& p, const ObjectivePoint& q) {
    return p.latency <= q.latency && p.cost <= q.cost &&
           (p.latency < q.latency || p.cost < q.cost);
}

ParetoFrontier::ParetoFrontier(double latency_max_ms, double cost_max)
    : latency_max_ms_(latency_max_ms), cost_max_(cost_max) {
    if (latency_max_ms_ <= 0.0 || cost_max_ <= 0.0)
        throw std::invalid_argument("ParetoFrontier: normalizers must be positive");
}

ObjectivePoint ParetoFrontier::normalize(double latency_ms, double cost, bool* clamped) const {
    ObjectivePoint p{latency_ms / latency_max_ms_, cost / cost_max_};
    bool hit = false;
    if (p.latency > 1.0) { p.latency = 1.0; hit = true; }
    if (p.cost > 1.0) { p.cost = 1.0; hit = true; }
    if (p.latency < 0.0) p.latency = 0.0;
    if (p.cost < 0.0) p.cost = 0.0;
    if (clamped) *clamped = hit;
    return p;
}

bool ParetoFrontier::strictly_dominated(const ObjectivePoint& p) const {
    return std::any_of(points_.begin(), points_.end(),
                       [&](const ObjectivePoint& q) { return dominates(q, p); });
}

ParetoFrontier::UpdateResult ParetoFrontier::update(double latency_ms, double cost) {
    UpdateResult res;
    ObjectivePoint p = normalize(latency_ms, cost, &res.clamped);
    res.inserted = insert_normalized(p);
    return res;
}

bool ParetoFrontier::insert_normalized(const ObjectivePoint& p) {
    for (const ObjectivePoint& q : points_) {
        if (q == p || dominates(q, p)) return false;  // duplicate or dominated
    }
    std::erase_if(points_, [&](const ObjectivePoint& q) { return dominates(p, q); });
    auto pos = std::lower_bound(points_.begin(), points_.end(), p,
                                [](const ObjectivePoint& a, const ObjectivePoint& b) {
                                    return a.latency < b.latency;
                                });
    points_.insert(pos, p);
    return true;
}

double ParetoFrontier::hypervolume() const {
    // Points sorted by latency ascending; costs are strictly descending on a
    // valid frontier, so the covered region decomposes into vertical slabs.
    double hv = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        double next_latency = (i + 1 < points_.size()) ? points_[i + 1].latency : 1.0;
        hv += (next_latency - points_[i].latency) * (1.0 - points_[i].cost);
    }
    return hv;
}

double ParetoFrontier::contribution(const ObjectivePoint& p) const {
    if (strictly_dominated(p))
        throw std::logic_error("contribution: point is dominated, caller must branch first");
    ParetoFrontier with = *this;
    with.insert_normalized(p);
    return with.hypervolume() - hypervolume();
}

std::optional<double> ParetoFrontier::distance(const ObjectivePoint& p) const {
    if (points_.empty()) return std::nullopt;
    double best = std::numeric_limits<double>::infinity();
    for (const ObjectivePoint& q : points_) {
        double dl = p.latency - q.latency;
        double dc = p.cost - q.cost;
        best = std::min(best, dl * dl + dc * dc);
    }
    return std::sqrt(best);
}

double ParetoFrontier::reward(const ObjectivePoint& p) const {
    if (!strictly_dominated(p)) return 1.0 + contribution(p);
    return 0.8 / (1.0 + *distance(p));
}

}  // namespace scalelab
