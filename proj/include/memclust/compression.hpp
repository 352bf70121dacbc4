#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "memclust/core.hpp"

namespace memclust {

struct KMeansOptions {
    std::size_t k = 4;
    std::uint64_t seed = 0;
    std::size_t max_iter = 100;
    double tol = 1e-6;  // on the largest centroid displacement (Euclidean)
    std::size_t n_init = 32;  // independent k-means++ restarts; lowest inertia wins
};

/// Lloyd's algorithm with k-means++ seeding from a seeded mt19937_64,
/// restarted n_init times from the same RNG stream (first best run kept).
///
/// Uses min(k, #distinct points) centroids. A centroid that loses all its
/// points is moved onto the point farthest from its own centroid. On return
/// every point sits with its nearest centroid (ties -> lowest cluster id).
/// Iterations work from a pairwise squared-distance table; the returned
/// centroids and inertia are recomputed from the points.
ClusterAssignment kmeans(std::span<const std::vector<float>> points, const KMeansOptions& options);

/// Number of pairwise-distinct vectors (bitwise comparison).
std::size_t count_distinct(std::span<const std::vector<float>> points);

CompressedMemory compress_mean(std::span<const MemoryTokens> memories);
CompressedMemory compress_concat(std::span<const MemoryTokens> memories);

/// Clusters the flattened memories, averages each cluster in memory-index
/// order, and concatenates the cluster memories ordered by their smallest
/// member index.
CompressedMemory compress_clustering(std::span<const MemoryTokens> memories, std::size_t k, std::uint64_t seed);

/// Dispatch on config.variant.
CompressedMemory compress(const StrategyConfig& config, std::span<const MemoryTokens> memories);

/// Nominal memory-token count for a strategy.
std::size_t token_budget(const StrategyConfig& config);

}  // namespace memclust
