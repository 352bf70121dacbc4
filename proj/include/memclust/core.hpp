#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memclust/error.hpp"

namespace memclust {

/// Dense row-major float32 matrix. Row = memory token, column = embedding dim.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<float> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    float& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    float at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<float> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const float> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

    std::span<const float> values() const noexcept { return values_; }
    std::span<float> values() noexcept { return values_; }

    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<float> values_;
};

struct Document {
    std::string id;
    std::string text;

    /// Throws invalid-argument when the id is empty or the text is blank.
    void validate() const;
    friend bool operator==(const Document&, const Document&) = default;
};

struct Example {
    std::string id;
    std::string instruction;
    std::string reference;
    std::vector<Document> profile;

    void validate() const;
};

/// One document's compressed representation: d_m x d_e memory tokens.
class MemoryTokens {
public:
    MemoryTokens() = default;
    /// Rejects empty shapes and non-finite entries.
    MemoryTokens(std::string doc_id, Matrix tokens);

    const std::string& doc_id() const noexcept { return doc_id_; }
    const Matrix& tokens() const noexcept { return tokens_; }
    std::size_t d_m() const noexcept { return tokens_.rows(); }
    std::size_t d_e() const noexcept { return tokens_.cols(); }

    friend bool operator==(const MemoryTokens&, const MemoryTokens&) = default;

private:
    std::string doc_id_;
    Matrix tokens_;
};

enum class Strategy { mean, concat, clustering };

std::string_view to_string(Strategy s) noexcept;
/// Parses "mean" | "concat" | "clustering"; throws invalid-argument otherwise.
Strategy parse_strategy(std::string_view name);

/// Origin of a contiguous run of output rows [row_begin, row_end).
struct BlockProvenance {
    std::size_t row_begin = 0;
    std::size_t row_end = 0;
    std::optional<std::size_t> cluster_id;
    std::vector<std::string> member_doc_ids;

    friend bool operator==(const BlockProvenance&, const BlockProvenance&) = default;
};

struct CompressedMemory {
    Matrix rows;
    Strategy strategy = Strategy::mean;
    std::size_t block_rows = 0;   // d_m of the source memories
    std::size_t effective_k = 0;  // clustering only; 0 otherwise
    std::vector<BlockProvenance> provenance;

    std::size_t token_count() const noexcept { return rows.rows(); }
    std::size_t block_count() const noexcept { return provenance.size(); }
};

struct ClusterAssignment {
    std::vector<std::size_t> assignments;  // point index -> cluster id
    std::size_t k = 0;                     // number of centroids
    std::size_t dim = 0;
    std::vector<double> centroids;         // k x dim, row-major
    double inertia = 0.0;
    std::size_t iterations = 0;
    std::vector<double> inertia_history;   // inertia after each assignment step

    std::span<const double> centroid(std::size_t c) const { return {centroids.data() + c * dim, dim}; }
};

struct StrategyConfig {
    Strategy variant = Strategy::clustering;
    std::size_t n_retrieved = 8;
    std::size_t d_m = 128;
    std::size_t k = 4;
    std::uint64_t seed = 0;

    void validate() const;
    /// Short stable label, e.g. "clustering(k=4,dm=128,n=8)".
    std::string label() const;
    friend bool operator==(const StrategyConfig&, const StrategyConfig&) = default;
};

/// Element-wise mean, accumulated in double in input order.
Matrix average_memories(std::span<const MemoryTokens> memories);
Matrix average_memories(std::span<const Matrix> memories);

/// Stacks blocks vertically in list order.
Matrix concat_rows(std::span<const Matrix> blocks);

std::vector<float> flatten(const MemoryTokens& memory);
Matrix unflatten(std::span<const float> flat, std::size_t d_m, std::size_t d_e);

/// Throws shape-mismatch unless every memory has the same (d_m, d_e).
void require_uniform_shape(std::span<const MemoryTokens> memories);

}  // namespace memclust
