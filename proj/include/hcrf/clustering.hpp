#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hcrf {

struct ClusterSet {
    int k = 0;
    std::vector<std::vector<double>> centroids;
    std::vector<int> assignments;  // one per input point
    double inertia = 0.0;          // sum of squared distances to assigned centroids
    int iterations = 0;

    friend bool operator==(const ClusterSet&, const ClusterSet&) = default;
};

struct KMeansOptions {
    std::uint64_t seed = 0;
    int max_iter = 100;
    // When set, receives the inertia after seeding and after every iteration.
    std::vector<double>* inertia_trace = nullptr;
};

/// Lloyd's algorithm with k-means++ seeding.
///
/// Seeding and every random draw come from XorShift64Star(seed). Points are
/// assigned to the nearest centroid with ties going to the lower index. A
/// cluster that empties out is re-seeded with the point farthest from its
/// current centroid (taken from a cluster that keeps at least one member).
/// Iteration stops when assignments stop changing or after max_iter rounds.
ClusterSet kmeans(std::span<const std::vector<double>> points, int k,
                  const KMeansOptions& options = {});

// Index of the nearest centroid, ties to the lower index.
int nearest_centroid(std::span<const std::vector<double>> centroids, std::span<const double> point);

int nearest_cluster(const ClusterSet& clusters, std::span<const double> descriptor);

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace hcrf
