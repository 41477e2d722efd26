#include "hpcwatch/lof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "hpcwatch/error.hpp"

namespace hpcwatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// A difference of two doubles is off by at most one ulp of the larger operand,
// so distances that are equal in exact arithmetic can differ by a few ulps of
// the largest magnitude in the set. Ties within that band count as ties.
double tie_tolerance(const PointSet& points)
{
    double largest = 0.0;
    for (auto v : points.values()) largest = std::max(largest, std::abs(v));
    return 4.0 * std::numeric_limits<double>::epsilon() * largest;
}

void check_k(const PointSet& points, std::size_t k)
{
    if (k < 1 || points.size() < 2 || k > points.size() - 1)
        throw Error("k=" + std::to_string(k) + " out of range for " + std::to_string(points.size()) + " points");
}

void check_index(const PointSet& points, std::size_t i)
{
    if (i >= points.size()) throw Error("point index " + std::to_string(i) + " out of range");
}

// Lazily computed neighbourhoods; the single-point and batch entry points both
// go through here so they perform identical floating-point operations.
class Neighborhoods {
public:
    Neighborhoods(const PointSet& points, std::size_t k)
        : points_(points), k_(k), tie_tolerance_(tie_tolerance(points)), cache_(points.size()), lrd_(points.size())
    {
    }

    const Neighborhood& of(std::size_t i)
    {
        auto& slot = cache_[i];
        if (!slot) slot = compute(i);
        return *slot;
    }

    double k_distance(std::size_t i) { return of(i).k_distance; }

    double reach(std::size_t a, std::size_t b) { return std::max(k_distance(b), distance(points_[a], points_[b])); }

    double lrd(std::size_t i)
    {
        auto& slot = lrd_[i];
        if (slot) return *slot;
        const auto& members = of(i).members;
        double sum = 0.0;
        for (auto b : members) sum += reach(i, b);
        double mean = sum / static_cast<double>(members.size());
        slot = mean == 0.0 ? kInf : 1.0 / mean;
        return *slot;
    }

    double lof(std::size_t i)
    {
        double own = lrd(i);
        const auto& members = of(i).members;
        double sum = 0.0;
        bool all_infinite = true;
        for (auto b : members) {
            double d = lrd(b);
            all_infinite = all_infinite && std::isinf(d);
            sum += d;
        }
        if (std::isinf(own)) return all_infinite ? 1.0 : std::numeric_limits<double>::denorm_min();
        return (sum / static_cast<double>(members.size())) / own;
    }

private:
    Neighborhood compute(std::size_t i) const
    {
        const auto n = points_.size();
        std::vector<double> dist;
        dist.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) dist.push_back(distance(points_[i], points_[j]));
        std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_ - 1), dist.end());

        Neighborhood nb;
        nb.center = i;
        nb.k = k_;
        nb.k_distance = dist[k_ - 1];
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && distance(points_[i], points_[j]) <= nb.k_distance + tie_tolerance_) nb.members.push_back(j);
        return nb;
    }

    const PointSet& points_;
    std::size_t k_;
    double tie_tolerance_;
    std::vector<std::optional<Neighborhood>> cache_;
    std::vector<std::optional<double>> lrd_;
};

}  // namespace

PointSet::PointSet(std::vector<double> values) : values_(std::move(values))
{
    for (auto v : values_)
        if (!std::isfinite(v)) throw Error("point set contains a non-finite value");
}

Neighborhood k_nearest(const PointSet& points, std::size_t i, std::size_t k)
{
    check_k(points, k);
    check_index(points, i);
    return Neighborhoods(points, k).of(i);
}

double reachability_distance(const PointSet& points, std::size_t a, std::size_t b, std::size_t k)
{
    check_k(points, k);
    check_index(points, a);
    check_index(points, b);
    if (a == b) throw Error("reachability distance of a point to itself");
    return Neighborhoods(points, k).reach(a, b);
}

double lrd(const PointSet& points, std::size_t i, std::size_t k)
{
    check_k(points, k);
    check_index(points, i);
    return Neighborhoods(points, k).lrd(i);
}

double lof(const PointSet& points, std::size_t i, std::size_t k)
{
    check_k(points, k);
    check_index(points, i);
    return Neighborhoods(points, k).lof(i);
}

std::vector<LofResult> lof_all(const PointSet& points, std::size_t k)
{
    if (points.size() < k + 1)
        throw Error("need at least " + std::to_string(k + 1) + " points, got " + std::to_string(points.size()));
    check_k(points, k);
    Neighborhoods nb(points, k);
    std::vector<LofResult> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out.push_back(LofResult{i, nb.lrd(i), nb.lof(i)});
    return out;
}

std::vector<std::size_t> top_n_outliers(std::span<const LofResult> results, std::size_t n)
{
    std::vector<const LofResult*> order;
    order.reserve(results.size());
    for (const auto& r : results) order.push_back(&r);
    std::sort(order.begin(), order.end(), [](const LofResult* a, const LofResult* b) {
        if (a->lof != b->lof) return a->lof > b->lof;
        return a->index < b->index;
    });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < order.size() && i < n; ++i) out.push_back(order[i]->index);
    return out;
}

}  // namespace hpcwatch
