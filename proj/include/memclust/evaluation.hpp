#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memclust/compression.hpp"
#include "memclust/core.hpp"
#include "memclust/encoding.hpp"
#include "memclust/retrieval.hpp"

namespace memclust {

// ---------------------------------------------------------------------------
// ROUGE-L

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// Sentence-level ROUGE-L F1 (beta = 1) over tokenize() output.
/// One empty side scores zero; both empty scores f1 = 1.
RougeScore rouge_l(std::string_view candidate, std::string_view reference);

// ---------------------------------------------------------------------------
// Dataset I/O

/// JSONL, one example per line:
/// {"id", "input", "output", "profile": [{"id", "text", "title"?}]}.
/// With a title the document text becomes title + "\n" + text.
std::vector<Example> parse_dataset(std::istream& in, const std::string& source = "<stream>");
std::vector<Example> load_dataset(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Generation

enum class GeneratorKind { mock, bridge };

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::mock;
    std::optional<std::string> bridge_endpoint;

    void validate() const;
};

/// Returns (up to the 24th token) the profile document whose reference
/// encoding's mean row lies nearest to the compressed memory's mean row.
/// Ties go to the lowest doc id. Empty profile -> the instruction itself.
std::string mock_generate(std::string_view instruction, const CompressedMemory& memory,
                          std::span<const Document> profile);

inline constexpr std::size_t kMockMaxTokens = 24;

// ---------------------------------------------------------------------------
// Experiments

struct ExampleScore {
    std::string example_id;
    RougeScore score;
    std::size_t effective_budget = 0;
    std::string generated;
    std::vector<std::string> retrieved_ids;
    /// "ok", "empty-profile", "error" or "skipped".
    std::string status = "ok";
    std::vector<std::string> flags;
    std::string error;
};

struct StrategyReport {
    StrategyConfig config;
    std::string label;
    std::size_t nominal_budget = 0;
    double mean_effective_budget = 0.0;
    double mean_f1 = 0.0;
    double median_f1 = 0.0;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    std::size_t scored = 0;
    std::size_t failures = 0;
    std::vector<ExampleScore> examples;  // dataset order
};

struct ReportMetadata {
    std::uint64_t seed = 0;
    std::string encoder;
    std::string generator;
    std::string dataset_path;
    std::string config_hash;
    std::size_t example_count = 0;
};

struct ExperimentReport {
    ReportMetadata meta;
    std::vector<StrategyReport> strategies;
    bool partial = false;
    std::string abort_reason;

    bool any_failure() const;
};

struct ExperimentSetup {
    std::vector<StrategyConfig> strategies;
    EncoderSpec encoder;
    GeneratorSpec generator;
    std::string dataset_path;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    Bm25Params bm25;
};

/// Retrieval and encoding run once per example and per distinct (n, d_m);
/// results are collected in dataset order whatever the job count.
ExperimentReport run_experiment(std::span<const Example> dataset, const ExperimentSetup& setup);

std::string report_to_json(const ExperimentReport& report);
std::string report_to_table(const ExperimentReport& report);
std::string report_to_csv(const ExperimentReport& report);

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { d_m, k, encoder_variant };

SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis) noexcept;

struct SweepPoint {
    std::string value;
    std::optional<ExperimentReport> report;
    std::string error;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::k;
    std::vector<SweepPoint> points;

    bool any_failure() const;
};

/// Applies one axis value to a copy of the setup. For encoder-variant,
/// "reference" or "reference:<d_e>" selects the built-in encoder and any
/// other value is used as the bridge command (also for a bridge generator).
ExperimentSetup apply_sweep_value(const ExperimentSetup& base, SweepAxis axis, const std::string& value);

/// One experiment per value; a failing point is recorded and the sweep goes on.
SweepResult sweep(std::span<const Example> dataset, const ExperimentSetup& base, SweepAxis axis,
                  const std::vector<std::string>& values);

std::string sweep_to_json(const SweepResult& result);
std::string sweep_to_table(const SweepResult& result);
std::string sweep_to_csv(const SweepResult& result);

}  // namespace memclust
