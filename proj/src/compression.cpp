#include "memclust/compression.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace memclust {

namespace {

double squared_distance(std::span<const float> p, std::span<const double> c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = static_cast<double>(p[i]) - c[i];
        acc += d * d;
    }
    return acc;
}

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Pairwise squared distances, computed once per call. Every centroid Lloyd
// produces is the mean of a member set S, so
//   |p_i - c_S|^2 = mean_{j in S} D_ij - (1 / (2|S|^2)) sum_{j,l in S} D_jl
// and no iteration has to touch the (possibly very wide) points again.
class DistanceTable {
public:
    explicit DistanceTable(std::span<const std::vector<float>> points) : n_(points.size()), d_(n_ * n_, 0.0) {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i + 1; j < n_; ++j) {
                double acc = 0.0;
                for (std::size_t t = 0; t < points[i].size(); ++t) {
                    const double diff = static_cast<double>(points[i][t]) - static_cast<double>(points[j][t]);
                    acc += diff * diff;
                }
                d_[i * n_ + j] = acc;
                d_[j * n_ + i] = acc;
            }
        }
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<double> d_;
};

struct Centroid {
    std::vector<std::size_t> members;  // ascending point indices
    double spread = 0.0;               // mean squared distance of members to their mean

    static Centroid of(std::vector<std::size_t> members, const DistanceTable& d) {
        Centroid c{std::move(members), 0.0};
        for (std::size_t a = 0; a < c.members.size(); ++a) {
            for (std::size_t b = a + 1; b < c.members.size(); ++b) c.spread += d(c.members[a], c.members[b]);
        }
        const auto m = static_cast<double>(c.members.size());
        c.spread /= m * m;
        return c;
    }

    double distance(std::size_t i, const DistanceTable& d) const {
        double acc = 0.0;
        for (auto j : members) acc += d(i, j);
        return std::max(0.0, acc / static_cast<double>(members.size()) - spread);
    }
};

double centroid_shift(const Centroid& a, const Centroid& b, const DistanceTable& d) {
    if (a.members == b.members) return 0.0;
    double cross = 0.0;
    for (auto i : a.members) {
        for (auto j : b.members) cross += d(i, j);
    }
    cross /= static_cast<double>(a.members.size() * b.members.size());
    return std::sqrt(std::max(0.0, cross - a.spread - b.spread));
}

struct Assignment {
    std::vector<std::size_t> labels;
    std::vector<double> distances;
    double inertia = 0.0;
};

Assignment assign_points(const DistanceTable& d, const std::vector<Centroid>& centroids) {
    Assignment a;
    a.labels.resize(d.size());
    a.distances.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_c = 0;
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            const double dist = centroids[c].distance(i, d);
            if (dist < best) {
                best = dist;
                best_c = c;
            }
        }
        a.labels[i] = best_c;
        a.distances[i] = best;
    }
    for (double v : a.distances) a.inertia += v;
    return a;
}

std::vector<Centroid> kmeanspp_init(const DistanceTable& d, std::size_t k, std::mt19937_64& rng) {
    const auto n = d.size();
    std::vector<std::size_t> seeds{static_cast<std::size_t>(rng() % n)};
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], d(i, seeds.back()));
            total += nearest[i];
        }
        const double target = unit_draw(rng) * total;
        std::size_t chosen = n;
        double cumulative = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (nearest[i] <= 0.0) continue;
            cumulative += nearest[i];
            chosen = i;
            if (cumulative > target) break;
        }
        seeds.push_back(chosen);
    }
    std::vector<Centroid> out;
    for (auto s : seeds) out.push_back(Centroid::of({s}, d));
    return out;
}

struct Run {
    std::vector<Centroid> centroids;
    Assignment final;
    std::vector<double> history;
    std::size_t iterations = 0;
};

Run lloyd_run(const DistanceTable& d, std::size_t k, const KMeansOptions& options, std::mt19937_64& rng) {
    const auto n = d.size();
    Run run;
    run.centroids = kmeanspp_init(d, k, rng);
    auto current = assign_points(d, run.centroids);
    run.history.push_back(current.inertia);

    for (std::size_t iter = 1; iter <= options.max_iter; ++iter) {
        std::vector<std::vector<std::size_t>> members(k);
        for (std::size_t i = 0; i < n; ++i) members[current.labels[i]].push_back(i);

        auto distances = current.distances;
        std::vector<Centroid> next;
        for (std::size_t c = 0; c < k; ++c) {
            if (members[c].empty()) {
                auto far = static_cast<std::size_t>(std::max_element(distances.begin(), distances.end()) - distances.begin());
                distances[far] = -1.0;
                members[c] = {far};
            }
            next.push_back(Centroid::of(std::move(members[c]), d));
        }

        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) shift = std::max(shift, centroid_shift(next[c], run.centroids[c], d));

        run.centroids = std::move(next);
        current = assign_points(d, run.centroids);
        run.history.push_back(current.inertia);
        run.iterations = iter;
        if (shift < options.tol) break;
    }
    run.final = std::move(current);
    return run;
}

}  // namespace

std::size_t count_distinct(std::span<const std::vector<float>> points) {
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    // Compare bit patterns so -0.0 and 0.0 stay distinct, matching bitwise equality elsewhere.
    auto bits_less = [&](std::size_t a, std::size_t b) {
        const auto& pa = points[a];
        const auto& pb = points[b];
        return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end(), [](float x, float y) {
            return std::bit_cast<std::uint32_t>(x) < std::bit_cast<std::uint32_t>(y);
        });
    };
    std::sort(order.begin(), order.end(), bits_less);
    std::size_t distinct = order.empty() ? 0 : 1;
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (bits_less(order[i - 1], order[i])) ++distinct;
    }
    return distinct;
}

ClusterAssignment kmeans(std::span<const std::vector<float>> points, const KMeansOptions& options) {
    if (points.empty()) throw Error(errc::empty_input, "kmeans needs at least one point");
    if (options.k < 1) throw Error(errc::invalid_argument, "kmeans needs k >= 1");
    if (options.n_init < 1) throw Error(errc::invalid_argument, "kmeans needs n_init >= 1");
    const auto dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) throw Error(errc::shape_mismatch, "kmeans points differ in dimension");
    }

    const auto k = std::min(options.k, count_distinct(points));
    const DistanceTable table(points);
    std::mt19937_64 rng(options.seed);
    auto best = lloyd_run(table, k, options, rng);
    // k == 1 has a single fixed point; k == n distinct always reaches zero inertia.
    for (std::size_t run = 1; run < options.n_init && k > 1 && best.final.inertia > 0.0; ++run) {
        auto candidate = lloyd_run(table, k, options, rng);
        if (candidate.final.inertia < best.final.inertia) best = std::move(candidate);
    }

    ClusterAssignment result;
    result.k = k;
    result.dim = dim;
    result.iterations = best.iterations;
    result.inertia_history = std::move(best.history);
    result.assignments = std::move(best.final.labels);
    result.centroids.assign(k * dim, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        double* dst = result.centroids.data() + c * dim;
        for (auto i : best.centroids[c].members) {
            for (std::size_t j = 0; j < dim; ++j) dst[j] += static_cast<double>(points[i][j]);
        }
        const auto cnt = static_cast<double>(best.centroids[c].members.size());
        for (std::size_t j = 0; j < dim; ++j) dst[j] /= cnt;
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        result.inertia += squared_distance(points[i], result.centroid(result.assignments[i]));
    }
    return result;
}

CompressedMemory compress_mean(std::span<const MemoryTokens> memories) {
    CompressedMemory out;
    out.rows = average_memories(memories);
    out.strategy = Strategy::mean;
    out.block_rows = memories.front().d_m();
    BlockProvenance p{0, out.rows.rows(), std::nullopt, {}};
    for (const auto& m : memories) p.member_doc_ids.push_back(m.doc_id());
    out.provenance.push_back(std::move(p));
    return out;
}

CompressedMemory compress_concat(std::span<const MemoryTokens> memories) {
    if (memories.empty()) throw Error(errc::empty_memory_set, "cannot concatenate an empty memory set");
    require_uniform_shape(memories);
    std::vector<Matrix> blocks;
    CompressedMemory out;
    out.strategy = Strategy::concat;
    out.block_rows = memories.front().d_m();
    for (std::size_t i = 0; i < memories.size(); ++i) {
        blocks.push_back(memories[i].tokens());
        out.provenance.push_back({i * out.block_rows, (i + 1) * out.block_rows, std::nullopt, {memories[i].doc_id()}});
    }
    out.rows = concat_rows(blocks);
    return out;
}

CompressedMemory compress_clustering(std::span<const MemoryTokens> memories, std::size_t k, std::uint64_t seed) {
    if (memories.empty()) throw Error(errc::empty_memory_set, "cannot cluster an empty memory set");
    require_uniform_shape(memories);

    std::vector<std::vector<float>> points;
    points.reserve(memories.size());
    for (const auto& m : memories) points.push_back(flatten(m));
    const auto clusters = kmeans(points, {.k = k, .seed = seed});

    // Members per cluster in ascending memory index; clusters ordered by first member.
    std::vector<std::vector<std::size_t>> members(clusters.k);
    for (std::size_t i = 0; i < memories.size(); ++i) members[clusters.assignments[i]].push_back(i);
    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < clusters.k; ++c) {
        if (!members[c].empty()) order.push_back(c);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return members[a].front() < members[b].front(); });

    CompressedMemory out;
    out.strategy = Strategy::clustering;
    out.block_rows = memories.front().d_m();
    out.effective_k = order.size();
    std::vector<Matrix> blocks;
    for (std::size_t c : order) {
        std::vector<Matrix> group;
        BlockProvenance p;
        p.cluster_id = c;
        for (std::size_t i : members[c]) {
            group.push_back(memories[i].tokens());
            p.member_doc_ids.push_back(memories[i].doc_id());
        }
        p.row_begin = blocks.size() * out.block_rows;
        p.row_end = p.row_begin + out.block_rows;
        blocks.push_back(average_memories(std::span<const Matrix>(group)));
        out.provenance.push_back(std::move(p));
    }
    out.rows = concat_rows(blocks);
    return out;
}

CompressedMemory compress(const StrategyConfig& config, std::span<const MemoryTokens> memories) {
    switch (config.variant) {
        case Strategy::mean: return compress_mean(memories);
        case Strategy::concat: return compress_concat(memories);
        case Strategy::clustering: return compress_clustering(memories, config.k, config.seed);
    }
    throw Error(errc::invalid_argument, "unknown strategy");
}

std::size_t token_budget(const StrategyConfig& config) {
    switch (config.variant) {
        case Strategy::mean: return config.d_m;
        case Strategy::concat: return config.n_retrieved * config.d_m;
        case Strategy::clustering: return config.k * config.d_m;
    }
    return 0;
}

}  // namespace memclust
