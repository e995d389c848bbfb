#include "hcrf/clustering.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "hcrf/errors.hpp"
#include "hcrf/rng.hpp"

namespace hcrf {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

int nearest_centroid(std::span<const std::vector<double>> centroids, std::span<const double> point) {
    int best = 0;
    double best_d = squared_distance(centroids[0], point);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
        const double d = squared_distance(centroids[c], point);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

int nearest_cluster(const ClusterSet& clusters, std::span<const double> descriptor) {
    if (clusters.centroids.empty()) throw ArgumentError("cluster set has no centroids");
    for (const auto& c : clusters.centroids) {
        if (c.size() != descriptor.size()) {
            throw ArgumentError("descriptor length " + std::to_string(descriptor.size()) +
                                " does not match centroid length " + std::to_string(c.size()));
        }
    }
    return nearest_centroid(clusters.centroids, descriptor);
}

namespace {

using Points = std::span<const std::vector<double>>;

std::vector<std::vector<double>> seed_plus_plus(Points points, int k, XorShift64Star& rng) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> centroids;
    std::vector<bool> chosen(n, false);

    auto first = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
    if (first >= n) first = n - 1;
    centroids.push_back(points[first]);
    chosen[first] = true;

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centroids[0]);

    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (double d : d2) total += d;
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double cumulative = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                cumulative += d2[i];
                pick = i;
                if (cumulative > target) break;
            }
        } else {
            // Every point coincides with a centroid: take the first unused one.
            for (std::size_t i = 0; i < n && pick == n; ++i) {
                if (!chosen[i]) pick = i;
            }
        }
        centroids.push_back(points[pick]);
        chosen[pick] = true;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
        }
    }
    return centroids;
}

std::vector<int> assign_all(Points points, const std::vector<std::vector<double>>& centroids) {
    std::vector<int> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = nearest_centroid(centroids, points[i]);
    return out;
}

double inertia_of(Points points, const std::vector<std::vector<double>>& centroids,
                  const std::vector<int>& assignments) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        s += squared_distance(points[i], centroids[assignments[i]]);
    }
    return s;
}

}  // namespace

ClusterSet kmeans(Points points, int k, const KMeansOptions& options) {
    if (k < 1) throw ArgumentError("k must be at least 1");
    if (points.size() < static_cast<std::size_t>(k)) {
        throw ArgumentError("k-means needs at least k = " + std::to_string(k) + " points, got " +
                            std::to_string(points.size()));
    }
    if (options.max_iter < 1) throw ArgumentError("max_iter must be at least 1");
    const std::size_t dim = points[0].size();
    for (const auto& p : points) {
        if (p.size() != dim) throw ArgumentError("k-means points have unequal lengths");
    }

    XorShift64Star rng(options.seed);
    ClusterSet result;
    result.k = k;
    result.centroids = seed_plus_plus(points, k, rng);
    result.assignments = assign_all(points, result.centroids);
    double inertia = inertia_of(points, result.centroids, result.assignments);
    if (options.inertia_trace != nullptr) options.inertia_trace->push_back(inertia);

    std::vector<std::size_t> counts(k);
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        // Update step: means of current members.
        std::fill(counts.begin(), counts.end(), 0);
        for (auto& c : result.centroids) std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            const int c = result.assignments[i];
            ++counts[c];
            auto& centroid = result.centroids[c];
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += points[i][d];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (double& v : result.centroids[c]) v /= static_cast<double>(counts[c]);
        }

        for (int c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = points.size();
            double far_d = -1.0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                if (counts[result.assignments[i]] < 2) continue;
                const double d = squared_distance(points[i], result.centroids[result.assignments[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --counts[result.assignments[far]];
            result.assignments[far] = c;
            counts[c] = 1;
            result.centroids[c] = points[far];
        }

        std::vector<int> next = assign_all(points, result.centroids);
        const double next_inertia = inertia_of(points, result.centroids, next);
        assert(next_inertia <= inertia + 1e-9 * (1.0 + inertia));
        inertia = next_inertia;
        if (options.inertia_trace != nullptr) options.inertia_trace->push_back(inertia);
        result.iterations = iter;
        const bool stable = next == result.assignments;
        result.assignments = std::move(next);
        if (stable) break;
    }
    result.inertia = inertia;
    return result;
}

}  // namespace hcrf
