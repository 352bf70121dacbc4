#include "memclust/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace memclust {

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols, 0.0f) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw Error(errc::shape_mismatch, "matrix value count " + std::to_string(values_.size()) +
                                              " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](float v) { return std::isfinite(v); });
}

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

void Document::validate() const {
    if (id.empty()) throw Error(errc::invalid_argument, "document id is empty");
    if (is_blank(text)) throw Error(errc::invalid_argument, "document '" + id + "' has blank text");
}

void Example::validate() const {
    if (is_blank(instruction)) throw Error(errc::invalid_argument, "example '" + id + "' has empty instruction");
    for (const auto& d : profile) d.validate();
}

MemoryTokens::MemoryTokens(std::string doc_id, Matrix tokens) : doc_id_(std::move(doc_id)), tokens_(std::move(tokens)) {
    if (tokens_.rows() == 0 || tokens_.cols() == 0) {
        throw Error(errc::shape_mismatch, "memory '" + doc_id_ + "' has an empty shape");
    }
    if (!tokens_.all_finite()) {
        throw Error(errc::invalid_argument, "memory '" + doc_id_ + "' contains non-finite values");
    }
}

std::string_view to_string(Strategy s) noexcept {
    switch (s) {
        case Strategy::mean: return "mean";
        case Strategy::concat: return "concat";
        case Strategy::clustering: return "clustering";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "mean") return Strategy::mean;
    if (name == "concat") return Strategy::concat;
    if (name == "clustering") return Strategy::clustering;
    throw Error(errc::invalid_argument, "unknown strategy '" + std::string(name) + "'");
}

void StrategyConfig::validate() const {
    if (n_retrieved < 1) throw Error(errc::invalid_argument, "n_retrieved must be >= 1");
    if (d_m < 1) throw Error(errc::invalid_argument, "d_m must be >= 1");
    if (variant == Strategy::clustering && (k < 1 || k > n_retrieved)) {
        throw Error(errc::invalid_argument, "clustering requires 1 <= k <= n_retrieved");
    }
}

std::string StrategyConfig::label() const {
    std::string out(to_string(variant));
    out += '(';
    if (variant == Strategy::clustering) out += "k=" + std::to_string(k) + ",";
    out += "dm=" + std::to_string(d_m) + ",n=" + std::to_string(n_retrieved) + ")";
    return out;
}

void require_uniform_shape(std::span<const MemoryTokens> memories) {
    if (memories.empty()) return;
    const auto d_m = memories.front().d_m();
    const auto d_e = memories.front().d_e();
    for (const auto& m : memories) {
        if (m.d_m() != d_m || m.d_e() != d_e) {
            throw Error(errc::shape_mismatch, "memory '" + m.doc_id() + "' is " + std::to_string(m.d_m()) + "x" +
                                                  std::to_string(m.d_e()) + ", expected " + std::to_string(d_m) +
                                                  "x" + std::to_string(d_e));
        }
    }
}

Matrix average_memories(std::span<const Matrix> memories) {
    if (memories.empty()) throw Error(errc::empty_memory_set, "cannot average an empty memory set");
    const auto rows = memories.front().rows();
    const auto cols = memories.front().cols();
    for (const auto& m : memories) {
        if (m.rows() != rows || m.cols() != cols) throw Error(errc::shape_mismatch, "memories differ in shape");
    }

    std::vector<double> acc(rows * cols, 0.0);
    for (const auto& m : memories) {
        const auto v = m.values();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += static_cast<double>(v[i]);
    }
    const auto n = static_cast<double>(memories.size());
    std::vector<float> out(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i] / n);
    return Matrix(rows, cols, std::move(out));
}

Matrix average_memories(std::span<const MemoryTokens> memories) {
    if (memories.empty()) throw Error(errc::empty_memory_set, "cannot average an empty memory set");
    require_uniform_shape(memories);
    std::vector<Matrix> mats;
    mats.reserve(memories.size());
    for (const auto& m : memories) mats.push_back(m.tokens());
    return average_memories(std::span<const Matrix>(mats));
}

Matrix concat_rows(std::span<const Matrix> blocks) {
    if (blocks.empty()) throw Error(errc::empty_memory_set, "cannot concatenate an empty block list");
    const auto cols = blocks.front().cols();
    std::size_t rows = 0;
    for (const auto& b : blocks) {
        if (b.cols() != cols) throw Error(errc::shape_mismatch, "blocks differ in column count");
        rows += b.rows();
    }
    std::vector<float> out;
    out.reserve(rows * cols);
    for (const auto& b : blocks) out.insert(out.end(), b.values().begin(), b.values().end());
    return Matrix(rows, cols, std::move(out));
}

std::vector<float> flatten(const MemoryTokens& memory) {
    const auto v = memory.tokens().values();
    return {v.begin(), v.end()};
}

Matrix unflatten(std::span<const float> flat, std::size_t d_m, std::size_t d_e) {
    if (flat.size() != d_m * d_e) throw Error(errc::shape_mismatch, "flat vector length does not match d_m*d_e");
    return Matrix(d_m, d_e, std::vector<float>(flat.begin(), flat.end()));
}

}  // namespace memclust
