#pragma once

// Local Outlier Factor over one-dimensional point sets.
//
// Points are counter deltas; the index is the identity of a point (a position
// in time) and the distance is the absolute difference of values. The k-nearest
// neighbourhood keeps every point tied at the k-distance, so it may hold more
// than k members. A distance within a few ulps (of the largest |value|) of the
// k-distance counts as tied, so rescaled or shifted inputs keep the same
// neighbourhoods.
//
// Degenerate densities: when every neighbour of a point is an exact duplicate,
// the mean reachability distance is 0 and lrd is +infinity. LOF is then 1 if
// the neighbours are equally infinite-density, the smallest positive double if
// only the point itself is, and +infinity for a finite-density point whose
// neighbours sit in a duplicate cluster.

#include <cstddef>
#include <span>
#include <vector>

namespace hpcwatch {

class PointSet {
public:
    PointSet() = default;
    /// Throws Error if any value is not finite.
    explicit PointSet(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }

private:
    std::vector<double> values_;
};

struct Neighborhood {
    std::size_t center = 0;
    std::size_t k = 0;
    double k_distance = 0.0;
    std::vector<std::size_t> members;  // ascending index, never contains center
};

struct LofResult {
    std::size_t index = 0;
    double lrd = 0.0;
    double lof = 0.0;
};

inline double distance(double a, double b) { return a > b ? a - b : b - a; }

/// Throws Error unless 1 <= k <= points.size() - 1 and i is in range.
Neighborhood k_nearest(const PointSet& points, std::size_t i, std::size_t k);

/// max(k-distance(b), d(a, b)). Throws Error if a == b.
double reachability_distance(const PointSet& points, std::size_t a, std::size_t b, std::size_t k);

double lrd(const PointSet& points, std::size_t i, std::size_t k);

double lof(const PointSet& points, std::size_t i, std::size_t k);

/// Same values as calling lof()/lrd() per point, bit for bit.
/// Throws Error if points.size() < k + 1.
std::vector<LofResult> lof_all(const PointSet& points, std::size_t k);

/// Indices of the n largest scores, descending; ties go to the earlier index.
std::vector<std::size_t> top_n_outliers(std::span<const LofResult> results, std::size_t n);

}  // namespace hpcwatch
