#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "memclust/encoding.hpp"
#include "test_paths.hpp"

using namespace memclust;

TEST_CASE("fnv1a64 reference vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("reference encoder golden matrix") {
    // Frozen from tests/oracles/hash_encoder.py.
    const Document doc{"golden", "The quick brown fox jumps over the lazy dog near the river bank"};
    const auto m = reference_encode(doc, 4, 8);
    const float s3 = 0.5773502588272095f;
    const Matrix expected(4, 8,
                          {-0.5f, 0.0f, 0.0f, 0.5f, 1.0f, -0.5f, -0.5f, -0.5f,  //
                           0.0f, 0.0f, -s3, -s3, s3, -s3, 0.0f, -s3,           //
                           0.0f, -s3, s3, 0.0f, -s3, 0.0f, 0.0f, 0.0f,         //
                           0.0f, -s3, 0.0f, 0.0f, 1.154700517654419f, -s3, 0.0f, -s3});
    CHECK(m.tokens() == expected);
    CHECK(m.doc_id() == "golden");
}

TEST_CASE("reference encoder shape, determinism and sensitivity") {
    const Document a{"a", "Local bakery wins the regional bread contest for a third year"};
    const auto m1 = reference_encode(a, 128, 2048);
    const auto m2 = reference_encode(a, 128, 2048);
    CHECK(m1.d_m() == 128);
    CHECK(m1.d_e() == 2048);
    CHECK(m1 == m2);
    CHECK(m1.tokens().all_finite());

    const Document b{"a", "Local bakery wins the national bread contest for a third year"};
    CHECK_FALSE(reference_encode(b, 128, 2048).tokens() == m1.tokens());
}

TEST_CASE("single-token document fills only row 0") {
    const auto m = reference_encode({"s", "hello"}, 6, 32);
    const auto row0 = m.tokens().row(0);
    CHECK(std::any_of(row0.begin(), row0.end(), [](float v) { return v != 0.0f; }));
    for (std::size_t r = 1; r < 6; ++r) {
        const auto row = m.tokens().row(r);
        CHECK(std::all_of(row.begin(), row.end(), [](float v) { return v == 0.0f; }));
    }
}

TEST_CASE("chunks are contiguous with earlier chunks larger") {
    // 5 tokens over 3 chunks -> sizes 2, 2, 1. Each chunk reproduces a standalone encoding of its tokens.
    const auto full = reference_encode({"x", "alpha beta gamma delta epsilon"}, 3, 64);
    CHECK(full.tokens().row(0).size() == 64);
    const auto c0 = reference_encode({"x", "alpha beta"}, 1, 64);
    const auto c1 = reference_encode({"x", "gamma delta"}, 1, 64);
    const auto c2 = reference_encode({"x", "epsilon"}, 1, 64);
    auto same = [](std::span<const float> a, std::span<const float> b) { return std::equal(a.begin(), a.end(), b.begin(), b.end()); };
    CHECK(same(full.tokens().row(0), c0.tokens().row(0)));
    CHECK(same(full.tokens().row(1), c1.tokens().row(0)));
    CHECK(same(full.tokens().row(2), c2.tokens().row(0)));
}

TEST_CASE("single-token chunks move with their tokens") {
    // One token per chunk means no bigrams; swapping two chunks' tokens swaps the rows.
    const auto a = reference_encode({"p", "red green blue"}, 3, 32);
    const auto b = reference_encode({"p", "red blue green"}, 3, 32);
    auto same = [](std::span<const float> x, std::span<const float> y) { return std::equal(x.begin(), x.end(), y.begin(), y.end()); };
    CHECK(same(a.tokens().row(0), b.tokens().row(0)));
    CHECK(same(a.tokens().row(1), b.tokens().row(2)));
    CHECK(same(a.tokens().row(2), b.tokens().row(1)));
}

TEST_CASE("encoder spec validation") {
    EncoderSpec s;
    CHECK_NOTHROW(s.validate());
    s.kind = EncoderKind::bridge;
    CHECK_THROWS_AS(s.validate(), Error);
    s.bridge_endpoint = "python3 bridge.py";
    CHECK_NOTHROW(s.validate());
    s.d_m = 0;
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("encode_profile preserves order and equals per-document encode") {
    const Encoder enc(EncoderSpec{.d_m = 4, .d_e = 16});
    const std::vector<Document> docs{{"z", "zulu yankee"}, {"a", "alpha bravo charlie"}, {"m", "mike"}};
    const auto mems = enc.encode_profile(docs, 4);
    REQUIRE(mems.size() == 3);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        CHECK(mems[i] == enc.encode(docs[i]));
        CHECK(mems[i].doc_id() == docs[i].id);
    }
}

namespace {

std::string bridge(const std::string& extra = "") {
    return std::string(MEMCLUST_PYTHON) + " " + MEMCLUST_FAKE_BRIDGE + " " + extra;
}

std::string code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

}  // namespace

TEST_CASE("bridge session handshake, encode and generate") {
    BridgeSession s(bridge("--d-e 12"));
    CHECK(s.model() == "fake-bridge");
    CHECK(s.d_e() == 12);
    const auto m = s.encode("doc-1", "some text", 5);
    CHECK(m.rows() == 5);
    CHECK(m.cols() == 12);
    CHECK(s.encode("doc-1", "some text", 5) == m);
    CHECK(s.generate("ex-1", "write a headline please now", m) == "write a headline please rows5");
    CHECK(s.generate("ex-2", "plain", Matrix(0, 12)) == "plain rows0");
}

TEST_CASE("bridge encoder adopts the declared width") {
    const Encoder enc(EncoderSpec{.kind = EncoderKind::bridge, .d_m = 3, .d_e = 2048, .bridge_endpoint = bridge("--d-e 6")});
    CHECK(enc.d_e() == 6);
    const auto m = enc.encode({"d", "text"});
    CHECK(m.d_m() == 3);
    CHECK(m.d_e() == 6);
    CHECK(enc.spec().model_name == "fake-bridge");
}

TEST_CASE("bridge failures map to error codes") {
    CHECK(code_of([] { BridgeSession s("exit 0"); }) == "bridge-unavailable");
    CHECK(code_of([] { BridgeSession(bridge("--exit-after 1")).encode("a", "b", 2); }) == "bridge-unavailable");
    CHECK(code_of([] { BridgeSession(bridge("--bad-shape")).encode("a", "b", 2); }) == "bridge-protocol-violation");
    CHECK(code_of([] { BridgeSession(bridge("--wrong-id")).encode("a", "b", 2); }) == "bridge-protocol-violation");
    CHECK(code_of([] { BridgeSession(bridge("--fail-on boom")).encode("a", "boom", 2); }) == kBridgeError);
}

TEST_CASE("encode_profile attaches the failing document id") {
    const Encoder enc(EncoderSpec{.kind = EncoderKind::bridge, .d_m = 2, .bridge_endpoint = bridge("--fail-on bad")});
    const std::vector<Document> docs{{"good-doc", "fine"}, {"bad-doc", "bad text"}};
    try {
        enc.encode_profile(docs, 2);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == kBridgeError);
        CHECK(std::string(e.what()).find("bad-doc") != std::string::npos);
    }
}

TEST_CASE("bridge session survives a malformed line") {
    BridgeSession s(bridge());
    const auto reply = s.exchange_raw("{not json");
    CHECK(reply.find("\"error\"") != std::string::npos);
    CHECK(s.encode("after", "still works", 2).rows() == 2);
}

TEST_CASE("unigram features of a chunk are order-invariant") {
    // Strip each ordering's single bigram feature; what remains is the unigram bag.
    const std::size_t d_e = 64;
    auto unigram_part = [&](const std::string& first, const std::string& second) {
        const auto m = reference_encode({"u", first + " " + second}, 1, d_e);
        std::vector<double> row(m.tokens().row(0).begin(), m.tokens().row(0).end());
        for (auto& v : row) v *= std::sqrt(2.0);
        const auto h = fnv1a64(first + '\x1f' + second);
        row[h % d_e] -= (h >> 63) ? -1.0 : 1.0;
        return row;
    };
    const auto ab = unigram_part("orange", "lemon");
    const auto ba = unigram_part("lemon", "orange");
    for (std::size_t i = 0; i < d_e; ++i) CHECK(ab[i] == doctest::Approx(ba[i]).epsilon(1e-6));
}
