#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "memclust/evaluation.hpp"
#include "memclust/retrieval.hpp"

namespace memclust {

using nlohmann::json;

void GeneratorSpec::validate() const {
    if (kind == GeneratorKind::bridge && (!bridge_endpoint || bridge_endpoint->empty())) {
        throw Error(errc::invalid_argument, "bridge generator requires a bridge command");
    }
    if (kind == GeneratorKind::mock && bridge_endpoint) {
        throw Error(errc::invalid_argument, "mock generator takes no bridge command");
    }
}

std::string mock_generate(std::string_view instruction, const CompressedMemory& memory,
                          std::span<const Document> profile) {
    if (profile.empty()) return std::string(instruction);

    const auto d_e = memory.rows.cols();
    const auto d_m = memory.block_rows;
    auto mean_row = [](const Matrix& m) {
        std::vector<double> acc(m.cols(), 0.0);
        for (std::size_t r = 0; r < m.rows(); ++r) {
            auto row = m.row(r);
            for (std::size_t c = 0; c < m.cols(); ++c) acc[c] += row[c];
        }
        if (m.rows() > 0) {
            for (auto& v : acc) v /= static_cast<double>(m.rows());
        }
        return acc;
    };
    const auto target = mean_row(memory.rows);

    const Document* best = nullptr;
    double best_dist = 0.0;
    for (const auto& doc : profile) {
        const auto row = mean_row(reference_encode(doc, d_m, d_e).tokens());
        double dist = 0.0;
        for (std::size_t c = 0; c < d_e; ++c) dist += (row[c] - target[c]) * (row[c] - target[c]);
        if (!best || dist < best_dist || (dist == best_dist && doc.id < best->id)) {
            best = &doc;
            best_dist = dist;
        }
    }

    const auto spans = token_spans(best->text);
    if (spans.size() <= kMockMaxTokens) return best->text;
    return best->text.substr(0, spans[kMockMaxTokens - 1].end);
}

bool ExperimentReport::any_failure() const {
    if (partial) return true;
    return std::any_of(strategies.begin(), strategies.end(), [](const StrategyReport& s) { return s.failures > 0; });
}

namespace {

bool is_bridge_error(const Error& e) { return e.code().rfind("bridge", 0) == 0; }

std::string describe(const EncoderSpec& spec) {
    if (spec.kind == EncoderKind::reference) return "reference(d_e=" + std::to_string(spec.d_e) + ")";
    std::string s = "bridge(" + spec.bridge_endpoint.value_or("");
    if (spec.model_name) s += ", model=" + *spec.model_name;
    return s + ")";
}

std::string describe(const GeneratorSpec& spec) {
    if (spec.kind == GeneratorKind::mock) return "mock";
    return "bridge(" + spec.bridge_endpoint.value_or("") + ")";
}

std::string config_hash(const ExperimentSetup& setup) {
    json j;
    j["strategies"] = json::array();
    for (const auto& s : setup.strategies) {
        j["strategies"].push_back({{"variant", std::string(to_string(s.variant))},
                                   {"n", s.n_retrieved},
                                   {"d_m", s.d_m},
                                   {"k", s.k},
                                   {"seed", s.seed}});
    }
    j["encoder"] = describe(setup.encoder);
    j["generator"] = describe(setup.generator);
    j["bm25"] = {setup.bm25.k1, setup.bm25.b};
    j["seed"] = setup.seed;
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

class Runner {
public:
    explicit Runner(const ExperimentSetup& setup) : setup_(setup) {
        encoder_ = std::make_unique<Encoder>(setup.encoder);
        if (setup.generator.kind == GeneratorKind::bridge) {
            if (encoder_->session() && setup.encoder.bridge_endpoint == setup.generator.bridge_endpoint) {
                generator_session_ = encoder_->session();
            } else {
                generator_session_ = std::make_shared<BridgeSession>(*setup.generator.bridge_endpoint);
            }
        }
    }

    std::vector<ExampleScore> run(const Example& ex) const {
        const auto& strategies = setup_.strategies;
        std::vector<ExampleScore> scores(strategies.size());
        for (auto& s : scores) s.example_id = ex.id;

        if (ex.profile.empty()) {
            for (std::size_t i = 0; i < strategies.size(); ++i) {
                auto& s = scores[i];
                s.status = "empty-profile";
                s.flags.push_back("empty-profile");
                s.generated = generate(ex, strategies[i], nullptr, {});
                finish(s, ex);
            }
            return scores;
        }

        const auto index = Bm25Index::build(ex.profile, setup_.bm25);
        std::map<std::size_t, std::vector<Document>> retrieved;
        std::map<std::pair<std::size_t, std::size_t>, std::vector<MemoryTokens>> encoded;

        for (std::size_t i = 0; i < strategies.size(); ++i) {
            const auto& cfg = strategies[i];
            auto& s = scores[i];
            try {
                auto rit = retrieved.find(cfg.n_retrieved);
                if (rit == retrieved.end()) {
                    rit = retrieved.emplace(cfg.n_retrieved, index.top_n(ex.instruction, cfg.n_retrieved)).first;
                }
                const auto& docs = rit->second;
                for (const auto& d : docs) s.retrieved_ids.push_back(d.id);

                const auto key = std::make_pair(cfg.n_retrieved, cfg.d_m);
                auto eit = encoded.find(key);
                if (eit == encoded.end()) eit = encoded.emplace(key, encoder_->encode_profile(docs, cfg.d_m)).first;

                const auto memory = compress(cfg, eit->second);
                s.effective_budget = memory.token_count();
                s.generated = generate(ex, cfg, &memory, docs);
                finish(s, ex);
            } catch (const Error& e) {
                if (is_bridge_error(e)) throw;
                s.status = "error";
                s.error = e.what();
            }
        }
        return scores;
    }

private:
    std::string generate(const Example& ex, const StrategyConfig& cfg, const CompressedMemory* memory,
                         std::span<const Document> docs) const {
        if (!generator_session_) {
            if (!memory) return ex.instruction;
            return mock_generate(ex.instruction, *memory, docs);
        }
        const auto id = ex.id + ":" + cfg.label();
        return generator_session_->generate(id, ex.instruction, memory ? memory->rows : Matrix(0, 0));
    }

    static void finish(ExampleScore& s, const Example& ex) {
        s.score = rouge_l(s.generated, ex.reference);
        if (tokenize(s.generated).empty() && tokenize(ex.reference).empty()) s.flags.push_back("both-empty");
    }

    const ExperimentSetup& setup_;
    std::unique_ptr<Encoder> encoder_;
    std::shared_ptr<BridgeSession> generator_session_;
};

void aggregate(StrategyReport& r) {
    std::vector<double> f1s;
    double budget = 0.0;
    double p = 0.0;
    double rc = 0.0;
    for (const auto& e : r.examples) {
        if (e.status == "error") ++r.failures;
        if (e.status != "ok" && e.status != "empty-profile") continue;
        f1s.push_back(e.score.f1);
        budget += static_cast<double>(e.effective_budget);
        p += e.score.precision;
        rc += e.score.recall;
    }
    r.scored = f1s.size();
    if (f1s.empty()) return;
    const auto n = static_cast<double>(f1s.size());
    double sum = 0.0;
    for (double f : f1s) sum += f;
    r.mean_f1 = sum / n;
    r.mean_precision = p / n;
    r.mean_recall = rc / n;
    r.mean_effective_budget = budget / n;
    std::sort(f1s.begin(), f1s.end());
    const auto mid = f1s.size() / 2;
    r.median_f1 = f1s.size() % 2 ? f1s[mid] : 0.5 * (f1s[mid - 1] + f1s[mid]);
}

}  // namespace

ExperimentReport run_experiment(std::span<const Example> dataset, const ExperimentSetup& setup) {
    if (dataset.empty()) throw Error(errc::empty_input, "dataset is empty");
    if (setup.strategies.empty()) throw Error(errc::invalid_argument, "no strategies selected");
    for (const auto& s : setup.strategies) s.validate();
    setup.encoder.validate();
    setup.generator.validate();
    setup.bm25.validate();

    const Runner runner(setup);
    const auto n_strategies = setup.strategies.size();
    std::vector<std::vector<ExampleScore>> outcomes(dataset.size());

    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex abort_mutex;
    std::string abort_reason;

    auto worker = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= dataset.size() || abort.load()) return;
            try {
                outcomes[i] = runner.run(dataset[i]);
            } catch (const Error& e) {
                std::lock_guard lock(abort_mutex);
                if (!abort.exchange(true)) abort_reason = e.what();
                outcomes[i].assign(n_strategies, ExampleScore{});
                for (auto& s : outcomes[i]) {
                    s.example_id = dataset[i].id;
                    s.status = "error";
                    s.error = e.what();
                }
            }
        }
    };

    const auto jobs = std::max<std::size_t>(1, std::min(setup.jobs, dataset.size()));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    ExperimentReport report;
    report.meta = {setup.seed, describe(setup.encoder), describe(setup.generator), setup.dataset_path,
                   config_hash(setup), dataset.size()};
    report.partial = abort.load();
    report.abort_reason = abort_reason;
    for (std::size_t s = 0; s < n_strategies; ++s) {
        StrategyReport r;
        r.config = setup.strategies[s];
        r.label = r.config.label();
        r.nominal_budget = token_budget(r.config);
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            if (outcomes[i].empty()) {
                ExampleScore skipped;
                skipped.example_id = dataset[i].id;
                skipped.status = "skipped";
                r.examples.push_back(std::move(skipped));
            } else {
                r.examples.push_back(outcomes[i][s]);
            }
        }
        aggregate(r);
        report.strategies.push_back(std::move(r));
    }
    return report;
}

}  // namespace memclust
