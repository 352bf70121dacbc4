#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "memclust/compression.hpp"
#include "memclust/encoding.hpp"
#include "memclust/evaluation.hpp"
#include "memclust/memory_io.hpp"
#include "memclust/retrieval.hpp"

namespace memclust::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Flags {
    std::string dataset;
    std::string config;
    std::string out = ".";
    std::string example;
    std::vector<std::string> strategies;
    std::size_t k = 4;
    std::size_t dm = 128;
    std::size_t de = 2048;
    std::size_t n = 8;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::string encoder = "reference";
    std::string generator = "mock";
    std::string bridge_cmd;
    std::string axis;
    std::vector<std::string> values;
    bool debug_json = false;

    std::map<std::string, CLI::Option*> opts;
    bool given(const std::string& name) const {
        auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }
};

void add_common(CLI::App* app, Flags& f, bool strategies, bool run_level) {
    f.opts["dataset"] = app->add_option("--dataset", f.dataset, "JSONL dataset path");
    f.opts["config"] = app->add_option("--config", f.config, "JSON run configuration (flags override it)");
    f.opts["out"] = app->add_option("--out", f.out, "output directory");
    f.opts["n"] = app->add_option("--n", f.n, "documents retrieved per example (N)");
    f.opts["dm"] = app->add_option("--dm", f.dm, "memory tokens per document (D_m)");
    f.opts["de"] = app->add_option("--de", f.de, "embedding width of the reference encoder (D_e)");
    f.opts["encoder"] = app->add_option("--encoder", f.encoder, "reference | bridge")
                            ->check(CLI::IsMember({"reference", "bridge"}));
    f.opts["bridge-cmd"] = app->add_option("--bridge-cmd", f.bridge_cmd, "bridge command (or MEMCLUST_BRIDGE_CMD)");
    if (strategies) {
        f.opts["strategy"] = app->add_option("--strategy", f.strategies, "mean | concat | clustering (repeatable)")
                                 ->check(CLI::IsMember({"mean", "concat", "clustering"}));
        f.opts["k"] = app->add_option("--k", f.k, "cluster count (K)");
        f.opts["seed"] = app->add_option("--seed", f.seed, "k-means seed");
    }
    if (run_level) {
        f.opts["generator"] = app->add_option("--generator", f.generator, "mock | bridge")
                                  ->check(CLI::IsMember({"mock", "bridge"}));
        f.opts["jobs"] = app->add_option("--jobs", f.jobs, "parallel examples")->check(CLI::PositiveNumber);
    }
}

struct RunConfig {
    std::string dataset;
    std::string out;
    ExperimentSetup setup;
    std::size_t n = 8;
    std::size_t d_m = 128;
};

StrategyConfig strategy_from_json(const json& j, const StrategyConfig& defaults) {
    StrategyConfig s = defaults;
    s.variant = parse_strategy(j.at("variant").get<std::string>());
    s.n_retrieved = j.value("n", s.n_retrieved);
    s.d_m = j.value("d_m", s.d_m);
    s.k = j.value("k", s.k);
    s.seed = j.value("seed", s.seed);
    return s;
}

RunConfig resolve(const Flags& f) {
    RunConfig rc;
    rc.out = ".";
    StrategyConfig defaults;
    std::vector<StrategyConfig> strategies;
    std::optional<std::string> bridge_cmd;
    std::string encoder_kind = "reference";
    std::string generator_kind = "mock";
    std::size_t d_e = 2048;

    if (!f.config.empty()) {
        json j;
        try {
            j = json::parse(read_file(f.config));
        } catch (const json::exception& e) {
            throw Error(errc::format_error, "config '" + f.config + "': " + e.what());
        }
        rc.dataset = j.value("dataset", rc.dataset);
        rc.out = j.value("out", rc.out);
        rc.setup.seed = j.value("seed", rc.setup.seed);
        rc.setup.jobs = j.value("jobs", rc.setup.jobs);
        defaults.seed = rc.setup.seed;
        defaults.n_retrieved = j.value("n", defaults.n_retrieved);
        defaults.d_m = j.value("d_m", defaults.d_m);
        defaults.k = j.value("k", defaults.k);
        if (j.contains("encoder")) {
            const auto& e = j.at("encoder");
            encoder_kind = e.value("kind", encoder_kind);
            d_e = e.value("d_e", d_e);
            if (e.contains("bridge_cmd") && e.at("bridge_cmd").is_string()) bridge_cmd = e.at("bridge_cmd").get<std::string>();
            if (e.contains("model_name") && e.at("model_name").is_string()) {
                rc.setup.encoder.model_name = e.at("model_name").get<std::string>();
            }
        }
        if (j.contains("generator")) {
            const auto& g = j.at("generator");
            generator_kind = g.value("kind", generator_kind);
            if (g.contains("bridge_cmd") && g.at("bridge_cmd").is_string()) bridge_cmd = g.at("bridge_cmd").get<std::string>();
        }
        if (j.contains("bm25")) {
            rc.setup.bm25.k1 = j.at("bm25").value("k1", rc.setup.bm25.k1);
            rc.setup.bm25.b = j.at("bm25").value("b", rc.setup.bm25.b);
        }
        if (j.contains("strategies")) {
            for (const auto& s : j.at("strategies")) strategies.push_back(strategy_from_json(s, defaults));
        }
    }

    if (f.given("dataset")) rc.dataset = f.dataset;
    if (f.given("out")) rc.out = f.out;
    if (f.given("jobs")) rc.setup.jobs = f.jobs;
    if (f.given("seed")) rc.setup.seed = f.seed;
    if (f.given("encoder")) encoder_kind = f.encoder;
    if (f.given("generator")) generator_kind = f.generator;
    if (f.given("de")) d_e = f.de;
    if (f.given("bridge-cmd")) bridge_cmd = f.bridge_cmd;
    if (f.given("n")) defaults.n_retrieved = f.n;
    if (f.given("dm")) defaults.d_m = f.dm;
    if (f.given("k")) defaults.k = f.k;
    defaults.seed = rc.setup.seed;

    if (f.given("strategy")) {
        strategies.clear();
        for (const auto& name : f.strategies) {
            StrategyConfig s = defaults;
            s.variant = parse_strategy(name);
            strategies.push_back(s);
        }
    } else if (strategies.empty()) {
        for (auto v : {Strategy::mean, Strategy::concat, Strategy::clustering}) {
            StrategyConfig s = defaults;
            s.variant = v;
            strategies.push_back(s);
        }
    } else {
        for (auto& s : strategies) {
            if (f.given("n")) s.n_retrieved = f.n;
            if (f.given("dm")) s.d_m = f.dm;
            if (f.given("k")) s.k = f.k;
            if (f.given("seed")) s.seed = f.seed;
        }
    }
    rc.setup.strategies = strategies;
    rc.n = defaults.n_retrieved;
    rc.d_m = defaults.d_m;

    if (!bridge_cmd) {
        if (const char* env = std::getenv("MEMCLUST_BRIDGE_CMD"); env && *env) bridge_cmd = env;
    }
    rc.setup.encoder.d_m = defaults.d_m;
    rc.setup.encoder.d_e = d_e;
    if (encoder_kind == "bridge") {
        if (!bridge_cmd) throw UsageError("--encoder bridge requires --bridge-cmd or MEMCLUST_BRIDGE_CMD");
        rc.setup.encoder.kind = EncoderKind::bridge;
        rc.setup.encoder.bridge_endpoint = bridge_cmd;
    } else if (encoder_kind != "reference") {
        throw UsageError("unknown encoder '" + encoder_kind + "'");
    }
    if (generator_kind == "bridge") {
        if (!bridge_cmd) throw UsageError("--generator bridge requires --bridge-cmd or MEMCLUST_BRIDGE_CMD");
        rc.setup.generator.kind = GeneratorKind::bridge;
        rc.setup.generator.bridge_endpoint = bridge_cmd;
    } else if (generator_kind != "mock") {
        throw UsageError("unknown generator '" + generator_kind + "'");
    }

    if (rc.dataset.empty()) throw UsageError("--dataset is required");
    rc.setup.dataset_path = rc.dataset;
    try {
        // retrieve and encode take no strategies, so defaults like k=4 must not reject a small --n.
        if (f.opts.contains("strategy")) {
            for (const auto& s : rc.setup.strategies) s.validate();
        }
        rc.setup.encoder.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    return rc;
}

std::string file_safe(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        if (!ok) c = '_';
    }
    return out;
}

std::string slug(const StrategyConfig& s) {
    std::string out(to_string(s.variant));
    if (s.variant == Strategy::clustering) out += "-k" + std::to_string(s.k);
    return out + "-dm" + std::to_string(s.d_m) + "-n" + std::to_string(s.n_retrieved);
}

const Example& find_example(const std::vector<Example>& data, const std::string& id) {
    auto it = std::find_if(data.begin(), data.end(), [&](const Example& e) { return e.id == id; });
    if (it == data.end()) throw Error(errc::unknown_document, "no example with id '" + id + "'");
    return *it;
}

fs::path ensure_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw Error(errc::io_error, "cannot create '" + dir + "': " + ec.message());
    return p;
}

int cmd_retrieve(const Flags& f, std::ostream& out) {
    const auto rc = resolve(f);
    if (f.example.empty()) throw UsageError("--example is required");
    const auto data = load_dataset(rc.dataset);
    const auto& ex = find_example(data, f.example);
    if (ex.profile.empty()) {
        out << "# example " << ex.id << " has an empty profile\n";
        return kExitOk;
    }
    const auto index = Bm25Index::build(ex.profile, rc.setup.bm25);
    std::size_t rank = 0;
    for (const auto& s : index.ranked(ex.instruction, rc.n)) {
        char score[64];
        std::snprintf(score, sizeof(score), "%.6f", s.score);
        out << rank++ << '\t' << s.doc.id << '\t' << score << '\n';
    }
    return kExitOk;
}

std::vector<MemoryTokens> encode_example(const RunConfig& rc, const Example& ex, std::size_t n, std::size_t d_m,
                                         std::vector<Document>& docs) {
    if (ex.profile.empty()) throw Error(errc::empty_memory_set, "example '" + ex.id + "' has an empty profile");
    docs = Bm25Index::build(ex.profile, rc.setup.bm25).top_n(ex.instruction, n);
    const Encoder encoder(rc.setup.encoder);
    return encoder.encode_profile(docs, d_m);
}

int cmd_encode(const Flags& f, std::ostream& out) {
    const auto rc = resolve(f);
    if (f.example.empty()) throw UsageError("--example is required");
    const auto data = load_dataset(rc.dataset);
    const auto& ex = find_example(data, f.example);
    std::vector<Document> docs;
    const auto memories = encode_example(rc, ex, rc.n, rc.d_m, docs);
    const auto dir = ensure_dir(rc.out);
    const auto path = dir / (file_safe(ex.id) + ".memories.memt");
    write_file(path, encode_memory_set(memories));
    if (f.debug_json) write_file(dir / (file_safe(ex.id) + ".memories.json"), memory_set_to_debug_json(memories));
    out << path.string() << '\n';
    return kExitOk;
}

int cmd_compress(const Flags& f, std::ostream& out) {
    const auto rc = resolve(f);
    if (f.example.empty()) throw UsageError("--example is required");
    const auto data = load_dataset(rc.dataset);
    const auto& ex = find_example(data, f.example);
    const auto dir = ensure_dir(rc.out);

    std::map<std::pair<std::size_t, std::size_t>, std::pair<std::vector<Document>, std::vector<MemoryTokens>>> cache;
    for (const auto& cfg : rc.setup.strategies) {
        auto key = std::make_pair(cfg.n_retrieved, cfg.d_m);
        auto it = cache.find(key);
        if (it == cache.end()) {
            std::vector<Document> docs;
            auto mems = encode_example(rc, ex, cfg.n_retrieved, cfg.d_m, docs);
            it = cache.emplace(key, std::make_pair(std::move(docs), std::move(mems))).first;
        }
        const auto memory = compress(cfg, it->second.second);
        const auto stem = file_safe(ex.id) + "." + slug(cfg);
        const auto path = dir / (stem + ".memt");
        write_file(path, encode_compressed_memory(memory));

        ordered_json summary;
        summary["example"] = ex.id;
        summary["strategy"] = std::string(to_string(cfg.variant));
        summary["label"] = cfg.label();
        summary["file"] = path.filename().string();
        summary["shape"] = {memory.rows.rows(), memory.rows.cols()};
        summary["d_m"] = memory.block_rows;
        summary["blocks"] = memory.block_count();
        summary["nominal_budget"] = token_budget(cfg);
        summary["effective_budget"] = memory.token_count();
        if (cfg.variant == Strategy::clustering) summary["effective_k"] = memory.effective_k;
        summary["provenance"] = ordered_json::array();
        for (const auto& p : memory.provenance) {
            ordered_json pj;
            pj["rows"] = {p.row_begin, p.row_end};
            pj["cluster"] = p.cluster_id ? ordered_json(*p.cluster_id) : ordered_json(nullptr);
            pj["members"] = p.member_doc_ids;
            summary["provenance"].push_back(std::move(pj));
        }
        write_file(dir / (stem + ".json"), summary.dump(2) + "\n");
        out << path.string() << '\t' << memory.rows.rows() << 'x' << memory.rows.cols() << '\n';
    }
    return kExitOk;
}

int cmd_eval(const Flags& f, std::ostream& out) {
    const auto rc = resolve(f);
    const auto data = load_dataset(rc.dataset);
    const auto report = run_experiment(data, rc.setup);
    const auto dir = ensure_dir(rc.out);
    write_file(dir / "report.json", report_to_json(report));
    const auto table = report_to_table(report);
    write_file(dir / "report.txt", table);
    write_file(dir / "report.csv", report_to_csv(report));
    out << table;
    if (report.partial) return kExitBridge;
    return report.any_failure() ? kExitDataError : kExitOk;
}

int cmd_sweep(const Flags& f, std::ostream& out) {
    if (f.values.empty()) throw UsageError("--values needs at least one value");
    const auto axis = [&] {
        try {
            return parse_sweep_axis(f.axis);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }();
    const auto rc = resolve(f);
    try {
        for (const auto& v : f.values) {
            for (const auto& s : apply_sweep_value(rc.setup, axis, v).strategies) s.validate();
        }
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    const auto data = load_dataset(rc.dataset);
    const auto result = sweep(data, rc.setup, axis, f.values);
    const auto dir = ensure_dir(rc.out);
    write_file(dir / "sweep.json", sweep_to_json(result));
    const auto table = sweep_to_table(result);
    write_file(dir / "sweep.txt", table);
    write_file(dir / "sweep.csv", sweep_to_csv(result));
    out << table;
    for (const auto& p : result.points) {
        if (p.report && p.report->partial) return kExitBridge;
        if (!p.report && p.error.rfind("bridge", 0) == 0) return kExitBridge;
    }
    return result.any_failure() ? kExitDataError : kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"memclust: clustering-based memory compression for personalized generation", "memclust"};
    app.require_subcommand(1);
    Flags fr, fe, fc, fv, fw;

    auto* retrieve = app.add_subcommand("retrieve", "print the BM25 top-N documents of one example");
    add_common(retrieve, fr, false, false);
    retrieve->add_option("--example", fr.example, "example id")->required();

    auto* encode = app.add_subcommand("encode", "encode one example's top-N documents into a memory tensor file");
    add_common(encode, fe, false, false);
    encode->add_option("--example", fe.example, "example id")->required();
    encode->add_flag("--debug-json", fe.debug_json, "also write the nested-array JSON form");

    auto* compress = app.add_subcommand("compress", "compress one example's memories with each strategy");
    add_common(compress, fc, true, false);
    compress->add_option("--example", fc.example, "example id")->required();

    auto* eval = app.add_subcommand("eval", "run the strategy comparison and write a report");
    add_common(eval, fv, true, true);

    auto* sweep_cmd = app.add_subcommand("sweep", "repeat eval across values of one axis");
    add_common(sweep_cmd, fw, true, true);
    sweep_cmd->add_option("--axis", fw.axis, "d_m | k | encoder-variant")->required();
    sweep_cmd->add_option("--values", fw.values, "axis values (comma separated or repeated)")->delimiter(',');

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (retrieve->parsed()) return cmd_retrieve(fr, out);
        if (encode->parsed()) return cmd_encode(fe, out);
        if (compress->parsed()) return cmd_compress(fc, out);
        if (eval->parsed()) return cmd_eval(fv, out);
        if (sweep_cmd->parsed()) return cmd_sweep(fw, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code().rfind("bridge", 0) == 0 ? kExitBridge : kExitDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDataError;
    }
    return kExitUsage;
}

}  // namespace memclust::cli
