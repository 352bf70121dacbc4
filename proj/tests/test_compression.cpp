#include <doctest.h>

#include <random>
#include <set>

#include "memclust/compression.hpp"
#include "oracles.hpp"

using namespace memclust;

namespace {

std::vector<MemoryTokens> random_memories(std::mt19937_64& rng, std::size_t n, std::size_t d_m, std::size_t d_e) {
    std::normal_distribution<float> g;
    std::vector<MemoryTokens> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<float> v(d_m * d_e);
        for (auto& x : v) x = g(rng);
        out.emplace_back("doc" + std::to_string(i), Matrix(d_m, d_e, std::move(v)));
    }
    return out;
}

std::string error_code(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

}  // namespace

TEST_CASE("token budgets") {
    CHECK(token_budget({.variant = Strategy::mean, .n_retrieved = 8, .d_m = 128}) == 128);
    CHECK(token_budget({.variant = Strategy::concat, .n_retrieved = 8, .d_m = 128}) == 1024);
    CHECK(token_budget({.variant = Strategy::clustering, .n_retrieved = 8, .d_m = 128, .k = 4}) == 512);
    CHECK(token_budget({.variant = Strategy::clustering, .n_retrieved = 8, .d_m = 32, .k = 4}) == 128);

    for (std::size_t n = 1; n <= 8; ++n) {
        for (std::size_t k = 1; k <= n; ++k) {
            const auto mean = token_budget({.variant = Strategy::mean, .n_retrieved = n, .d_m = 16});
            const auto clus = token_budget({.variant = Strategy::clustering, .n_retrieved = n, .d_m = 16, .k = k});
            const auto cat = token_budget({.variant = Strategy::concat, .n_retrieved = n, .d_m = 16});
            CHECK(mean <= clus);
            CHECK(clus <= cat);
        }
    }
}

TEST_CASE("kmeans k=1 converges to the mean") {
    std::vector<std::vector<float>> pts{{0, 0}, {2, 0}, {4, 6}};
    const auto r = kmeans(pts, {.k = 1});
    REQUIRE(r.k == 1);
    CHECK(r.centroid(0)[0] == doctest::Approx(2.0));
    CHECK(r.centroid(0)[1] == doctest::Approx(2.0));
    CHECK(r.assignments == std::vector<std::size_t>{0, 0, 0});
    CHECK(r.inertia == doctest::Approx(oracle::optimal_inertia(pts, 1)));
}

TEST_CASE("kmeans with k = distinct count reaches zero inertia") {
    std::vector<std::vector<float>> pts{{1, 1}, {5, 2}, {-3, 4}, {0, 9}};
    const auto r = kmeans(pts, {.k = 4, .seed = 17});
    CHECK(r.inertia == 0.0);
    std::set<std::size_t> ids(r.assignments.begin(), r.assignments.end());
    CHECK(ids.size() == 4);
}

TEST_CASE("kmeans two obvious groups match exhaustive enumeration") {
    std::vector<std::vector<float>> pts{{0, 0}, {0, 1}, {10, 0}, {10, 1}};
    CHECK(oracle::optimal_inertia(pts, 2) == doctest::Approx(1.0));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = kmeans(pts, {.k = 2, .seed = seed});
        CHECK(r.assignments[0] == r.assignments[1]);
        CHECK(r.assignments[2] == r.assignments[3]);
        CHECK(r.assignments[0] != r.assignments[2]);
        const auto left = r.assignments[0];
        const auto right = r.assignments[2];
        CHECK(r.centroid(left)[0] == doctest::Approx(0.0));
        CHECK(r.centroid(left)[1] == doctest::Approx(0.5));
        CHECK(r.centroid(right)[0] == doctest::Approx(10.0));
        CHECK(r.centroid(right)[1] == doctest::Approx(0.5));
        CHECK(r.inertia == doctest::Approx(1.0));
    }
}

TEST_CASE("kmeans reduces k when points repeat") {
    std::vector<std::vector<float>> pts{{1, 1}, {1, 1}, {2, 2}, {1, 1}};
    const auto r = kmeans(pts, {.k = 3});
    CHECK(r.k == 2);
    CHECK(r.inertia == 0.0);
    CHECK(count_distinct(pts) == 2);
}

TEST_CASE("kmeans errors") {
    std::vector<std::vector<float>> none;
    CHECK(error_code([&] { kmeans(none, {}); }) == "empty-input");
    std::vector<std::vector<float>> ragged{{1, 2}, {1}};
    CHECK(error_code([&] { kmeans(ragged, {}); }) == "shape-mismatch");
}

TEST_CASE("kmeans properties on random point sets") {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 60; ++t) {
        const std::size_t n = 1 + rng() % 8;
        const std::size_t dim = 1 + rng() % 16;
        const std::size_t k = 1 + rng() % n;
        const auto pts = oracle::random_points(rng, n, dim);
        const auto r = kmeans(pts, {.k = k, .seed = static_cast<std::uint64_t>(t)});

        for (std::size_t i = 1; i < r.inertia_history.size(); ++i) CHECK(r.inertia_history[i] <= r.inertia_history[i - 1]);
        CHECK(r.inertia >= 0.0);
        CHECK(r.assignments.size() == n);

        // Nearest-centroid assignment at termination: moving any point never helps.
        for (std::size_t i = 0; i < n; ++i) {
            auto dist = [&](std::size_t c) {
                double acc = 0.0;
                for (std::size_t d = 0; d < dim; ++d) acc += (pts[i][d] - r.centroid(c)[d]) * (pts[i][d] - r.centroid(c)[d]);
                return acc;
            };
            for (std::size_t c = 0; c < r.k; ++c) CHECK(dist(r.assignments[i]) <= dist(c));
        }

        const auto again = kmeans(pts, {.k = k, .seed = static_cast<std::uint64_t>(t)});
        CHECK(again.assignments == r.assignments);
        CHECK(again.centroids == r.centroids);
        CHECK(again.inertia == r.inertia);
    }
}

TEST_CASE("compress_mean and compress_concat shapes") {
    std::mt19937_64 rng(5);
    const auto mems = random_memories(rng, 8, 128, 4);
    const auto mean = compress_mean(mems);
    const auto cat = compress_concat(mems);
    CHECK(mean.token_count() == 128);
    CHECK(cat.token_count() == 1024);
    CHECK(mean.strategy == Strategy::mean);
    REQUIRE(cat.provenance.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(cat.provenance[i].member_doc_ids == std::vector<std::string>{mems[i].doc_id()});
        CHECK(cat.provenance[i].row_begin == i * 128);
    }

    std::vector<MemoryTokens> copies(8, mems[0]);
    CHECK(compress_mean(copies).rows == mems[0].tokens());

    std::vector<MemoryTokens> one{mems[3]};
    CHECK(compress_mean(one).rows == mems[3].tokens());
    CHECK(compress_concat(one).rows == compress_mean(one).rows);

    std::vector<MemoryTokens> none;
    CHECK(error_code([&] { compress_mean(none); }) == "empty-memory-set");
    CHECK(error_code([&] { compress_concat(none); }) == "empty-memory-set");
    CHECK(error_code([&] { compress_clustering(none, 2, 0); }) == "empty-memory-set");
}

TEST_CASE("compress_clustering default setting yields 512 tokens") {
    std::mt19937_64 rng(6);
    const auto mems = random_memories(rng, 8, 128, 8);
    const auto c = compress_clustering(mems, 4, 0);
    CHECK(c.effective_k == 4);
    CHECK(c.token_count() == 512);
    CHECK(c.provenance.size() == 4);

    // Every memory appears in exactly one block; blocks ordered by first member.
    std::vector<std::string> seen;
    std::size_t last_first = 0;
    for (std::size_t b = 0; b < c.provenance.size(); ++b) {
        const auto& p = c.provenance[b];
        CHECK(p.row_begin == b * 128);
        CHECK(p.row_end == (b + 1) * 128);
        const auto first = std::stoul(p.member_doc_ids.front().substr(3));
        if (b > 0) CHECK(first > last_first);
        last_first = first;
        seen.insert(seen.end(), p.member_doc_ids.begin(), p.member_doc_ids.end());
    }
    std::sort(seen.begin(), seen.end());
    CHECK(seen.size() == 8);
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("compress_clustering averages cluster members") {
    // Two tight groups: {0, 2} and {1, 3}.
    std::vector<MemoryTokens> mems{{"a", Matrix(1, 2, {0, 0})},
                                   {"b", Matrix(1, 2, {10, 10})},
                                   {"c", Matrix(1, 2, {0, 2})},
                                   {"d", Matrix(1, 2, {10, 12})}};
    const auto c = compress_clustering(mems, 2, 0);
    CHECK(c.rows == Matrix(2, 2, {0, 1, 10, 11}));
    CHECK(c.provenance[0].member_doc_ids == std::vector<std::string>{"a", "c"});
    CHECK(c.provenance[1].member_doc_ids == std::vector<std::string>{"b", "d"});
}

TEST_CASE("compress_clustering collapses duplicate memories") {
    std::mt19937_64 rng(8);
    auto mems = random_memories(rng, 2, 4, 3);
    mems.push_back(MemoryTokens("dup", mems[0].tokens()));
    const auto c = compress_clustering(mems, 3, 0);
    CHECK(c.effective_k == 2);
    CHECK(c.token_count() == 8);
}

TEST_CASE("strategy equivalences on random memory sets") {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 1 + rng() % 8;
        const auto mems = random_memories(rng, n, 1 + rng() % 6, 1 + rng() % 6);
        const auto seed = static_cast<std::uint64_t>(rng());
        CHECK(compress_clustering(mems, 1, seed).rows == compress_mean(mems).rows);
        CHECK(compress_clustering(mems, n, seed).rows == compress_concat(mems).rows);
        CHECK(compress({.variant = Strategy::clustering, .n_retrieved = n, .k = n, .seed = seed}, mems).rows ==
              compress_concat(mems).rows);
    }
}
