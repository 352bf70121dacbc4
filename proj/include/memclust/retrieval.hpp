#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "memclust/core.hpp"

namespace memclust {

/// Lowercases ASCII letters and splits on maximal runs of non-alphanumeric
/// bytes. Bytes >= 0x80 count as word characters so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

struct TokenSpan {
    std::size_t begin = 0;  // byte offsets into the source text
    std::size_t end = 0;
};

/// Same segmentation as tokenize(), reporting byte ranges instead.
std::vector<TokenSpan> token_spans(std::string_view text);

struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;

    void validate() const;
};

/// Okapi BM25 statistics over a fixed corpus. Immutable once built.
class Bm25Index {
public:
    /// Throws empty-corpus for an empty document list.
    static Bm25Index build(std::vector<Document> docs, Bm25Params params = {});

    /// Throws unknown-document when doc_id is not indexed.
    double score(std::string_view query, std::string_view doc_id) const;

    /// Top-n documents by descending score, ties by ascending id.
    std::vector<Document> top_n(std::string_view query, std::size_t n) const;

    struct Scored {
        Document doc;
        double score = 0.0;
    };
    std::vector<Scored> ranked(std::string_view query, std::size_t n) const;

    std::size_t corpus_size() const noexcept { return docs_.size(); }
    double average_length() const noexcept { return avg_len_; }
    std::size_t document_frequency(const std::string& term) const;
    std::size_t length(std::size_t doc_index) const { return lengths_[doc_index]; }
    const std::vector<Document>& documents() const noexcept { return docs_; }
    const Bm25Params& params() const noexcept { return params_; }

private:
    double score_index(const std::vector<std::string>& query_terms, std::size_t doc_index) const;

    Bm25Params params_;
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> id_to_index_;
    std::vector<std::unordered_map<std::string, std::size_t>> term_freqs_;
    std::vector<std::size_t> lengths_;
    std::unordered_map<std::string, std::size_t> doc_freq_;
    double avg_len_ = 0.0;
};

inline Bm25Index build_index(std::vector<Document> docs, Bm25Params params = {}) {
    return Bm25Index::build(std::move(docs), params);
}

}  // namespace memclust
