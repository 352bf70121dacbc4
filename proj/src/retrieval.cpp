#include "memclust/retrieval.hpp"

#include <algorithm>
#include <cmath>

namespace memclust {

namespace {

bool is_word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

std::vector<TokenSpan> token_spans(std::string_view text) {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        const auto start = i;
        while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) spans.push_back({start, i});
    }
    return spans;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    for (const auto& s : token_spans(text)) {
        std::string tok(text.substr(s.begin, s.end - s.begin));
        for (auto& c : tok) {
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        }
        tokens.push_back(std::move(tok));
    }
    return tokens;
}

void Bm25Params::validate() const {
    if (!(k1 >= 0.0) || !std::isfinite(k1)) throw Error(errc::invalid_argument, "bm25 k1 must be >= 0");
    if (!(b >= 0.0 && b <= 1.0)) throw Error(errc::invalid_argument, "bm25 b must lie in [0, 1]");
}

Bm25Index Bm25Index::build(std::vector<Document> docs, Bm25Params params) {
    params.validate();
    if (docs.empty()) throw Error(errc::empty_corpus, "cannot index an empty corpus");

    Bm25Index idx;
    idx.params_ = params;
    idx.docs_ = std::move(docs);
    idx.term_freqs_.resize(idx.docs_.size());
    idx.lengths_.resize(idx.docs_.size());

    std::size_t total = 0;
    for (std::size_t i = 0; i < idx.docs_.size(); ++i) {
        const auto& d = idx.docs_[i];
        if (!idx.id_to_index_.emplace(d.id, i).second) {
            throw Error(errc::duplicate_id, "document id '" + d.id + "' appears twice");
        }
        const auto tokens = tokenize(d.text);
        for (const auto& t : tokens) ++idx.term_freqs_[i][t];
        for (const auto& [term, tf] : idx.term_freqs_[i]) ++idx.doc_freq_[term];
        idx.lengths_[i] = tokens.size();
        total += tokens.size();
    }
    idx.avg_len_ = static_cast<double>(total) / static_cast<double>(idx.docs_.size());
    return idx;
}

std::size_t Bm25Index::document_frequency(const std::string& term) const {
    auto it = doc_freq_.find(term);
    return it == doc_freq_.end() ? 0 : it->second;
}

double Bm25Index::score_index(const std::vector<std::string>& query_terms, std::size_t doc_index) const {
    const auto& tfs = term_freqs_[doc_index];
    const double n_docs = static_cast<double>(docs_.size());
    // A corpus made only of punctuation has avg_len 0; every tf is 0 then too.
    const double len_ratio = avg_len_ > 0.0 ? static_cast<double>(lengths_[doc_index]) / avg_len_ : 1.0;
    const double norm = params_.k1 * (1.0 - params_.b + params_.b * len_ratio);

    double score = 0.0;
    for (const auto& term : query_terms) {
        auto it = tfs.find(term);
        if (it == tfs.end()) continue;
        const double tf = static_cast<double>(it->second);
        const double df = static_cast<double>(document_frequency(term));
        const double idf = std::log((n_docs - df + 0.5) / (df + 0.5) + 1.0);
        score += idf * (tf * (params_.k1 + 1.0)) / (tf + norm);
    }
    return score;
}

double Bm25Index::score(std::string_view query, std::string_view doc_id) const {
    auto it = id_to_index_.find(std::string(doc_id));
    if (it == id_to_index_.end()) {
        throw Error(errc::unknown_document, "document '" + std::string(doc_id) + "' is not indexed");
    }
    return score_index(tokenize(query), it->second);
}

std::vector<Bm25Index::Scored> Bm25Index::ranked(std::string_view query, std::size_t n) const {
    if (n < 1) throw Error(errc::invalid_argument, "top_n requires n >= 1");
    const auto terms = tokenize(query);
    std::vector<Scored> all;
    all.reserve(docs_.size());
    for (std::size_t i = 0; i < docs_.size(); ++i) all.push_back({docs_[i], score_index(terms, i)});
    std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc.id < b.doc.id;
    });
    all.resize(std::min(n, all.size()));
    return all;
}

std::vector<Document> Bm25Index::top_n(std::string_view query, std::size_t n) const {
    std::vector<Document> out;
    for (auto& s : ranked(query, n)) out.push_back(std::move(s.doc));
    return out;
}

}  // namespace memclust
