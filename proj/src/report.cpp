#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "memclust/evaluation.hpp"

namespace memclust {

using nlohmann::ordered_json;

namespace {

std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

ordered_json strategy_json(const StrategyReport& r) {
    ordered_json j;
    j["label"] = r.label;
    j["variant"] = std::string(to_string(r.config.variant));
    j["n_retrieved"] = r.config.n_retrieved;
    j["d_m"] = r.config.d_m;
    if (r.config.variant == Strategy::clustering) j["k"] = r.config.k;
    j["seed"] = r.config.seed;
    j["nominal_budget"] = r.nominal_budget;
    j["mean_effective_budget"] = r.mean_effective_budget;
    j["rouge_l"] = {{"mean_f1", r.mean_f1},
                    {"median_f1", r.median_f1},
                    {"mean_precision", r.mean_precision},
                    {"mean_recall", r.mean_recall},
                    {"mean_f1_pct", pct(r.mean_f1)}};
    j["scored"] = r.scored;
    j["failures"] = r.failures;
    j["examples"] = ordered_json::array();
    for (const auto& e : r.examples) {
        ordered_json x;
        x["id"] = e.example_id;
        x["status"] = e.status;
        x["precision"] = e.score.precision;
        x["recall"] = e.score.recall;
        x["f1"] = e.score.f1;
        x["effective_budget"] = e.effective_budget;
        x["retrieved"] = e.retrieved_ids;
        x["generated"] = e.generated;
        x["flags"] = e.flags;
        if (!e.error.empty()) x["error"] = e.error;
        j["examples"].push_back(std::move(x));
    }
    return j;
}

ordered_json report_json(const ExperimentReport& report) {
    ordered_json j;
    j["meta"] = {{"seed", report.meta.seed},
                 {"encoder", report.meta.encoder},
                 {"generator", report.meta.generator},
                 {"dataset", report.meta.dataset_path},
                 {"config_hash", report.meta.config_hash},
                 {"examples", report.meta.example_count}};
    j["partial"] = report.partial;
    if (report.partial) j["abort_reason"] = report.abort_reason;
    j["strategies"] = ordered_json::array();
    for (const auto& s : report.strategies) j["strategies"].push_back(strategy_json(s));
    return j;
}

void table_header(std::ostringstream& out, const char* lead) {
    char line[256];
    std::snprintf(line, sizeof(line), "%s%-28s %8s %10s %14s %11s %7s %7s\n", lead, "Method", "Tokens", "Eff.tokens",
                  "ROUGE-L (%)", "Median (%)", "Scored", "Failed");
    out << line;
}

void table_row(std::ostringstream& out, const char* lead, const StrategyReport& s) {
    char line[256];
    std::snprintf(line, sizeof(line), "%s%-28s %8zu %10s %14s %11s %7zu %7zu\n", lead, s.label.c_str(),
                  s.nominal_budget, fixed2(s.mean_effective_budget).c_str(), pct(s.mean_f1).c_str(),
                  pct(s.median_f1).c_str(), s.scored, s.failures);
    out << line;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) { return report_json(report).dump(2) + "\n"; }

std::string report_to_table(const ExperimentReport& report) {
    std::ostringstream out;
    out << "dataset: " << report.meta.dataset_path << "  examples: " << report.meta.example_count
        << "  encoder: " << report.meta.encoder << "  generator: " << report.meta.generator
        << "  seed: " << report.meta.seed << "\n";
    table_header(out, "");
    for (const auto& s : report.strategies) table_row(out, "", s);
    if (report.partial) out << "PARTIAL RESULTS: " << report.abort_reason << "\n";
    return out.str();
}

std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "strategy,variant,n_retrieved,d_m,k,nominal_budget,mean_effective_budget,rouge_l_f1_pct,median_f1_pct,"
           "scored,failures\n";
    for (const auto& s : report.strategies) {
        out << '"' << s.label << "\"," << to_string(s.config.variant) << ',' << s.config.n_retrieved << ','
            << s.config.d_m << ',' << (s.config.variant == Strategy::clustering ? std::to_string(s.config.k) : "")
            << ',' << s.nominal_budget << ',' << fixed2(s.mean_effective_budget) << ',' << pct(s.mean_f1) << ','
            << pct(s.median_f1) << ',' << s.scored << ',' << s.failures << '\n';
    }
    return out.str();
}

bool SweepResult::any_failure() const {
    for (const auto& p : points) {
        if (!p.report || p.report->any_failure()) return true;
    }
    return false;
}

std::string sweep_to_json(const SweepResult& result) {
    ordered_json j;
    j["axis"] = std::string(to_string(result.axis));
    j["points"] = ordered_json::array();
    for (const auto& p : result.points) {
        ordered_json x;
        x["value"] = p.value;
        if (p.report) {
            x["report"] = report_json(*p.report);
        } else {
            x["error"] = p.error;
        }
        j["points"].push_back(std::move(x));
    }
    return j.dump(2) + "\n";
}

std::string sweep_to_table(const SweepResult& result) {
    std::ostringstream out;
    out << "sweep over " << to_string(result.axis) << "\n";
    char lead[64];
    std::snprintf(lead, sizeof(lead), "%-24s ", to_string(result.axis).data());
    table_header(out, lead);
    for (const auto& p : result.points) {
        std::snprintf(lead, sizeof(lead), "%-24s ", p.value.c_str());
        if (!p.report) {
            out << lead << "ERROR: " << p.error << "\n";
            continue;
        }
        for (const auto& s : p.report->strategies) table_row(out, lead, s);
    }
    return out.str();
}

std::string sweep_to_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "axis,value,strategy,variant,nominal_budget,mean_effective_budget,rouge_l_f1_pct,median_f1_pct,status\n";
    for (const auto& p : result.points) {
        if (!p.report) {
            out << to_string(result.axis) << ",\"" << p.value << "\",,,,,,,error\n";
            continue;
        }
        for (const auto& s : p.report->strategies) {
            out << to_string(result.axis) << ",\"" << p.value << "\",\"" << s.label << "\"," << to_string(s.config.variant)
                << ',' << s.nominal_budget << ',' << fixed2(s.mean_effective_budget) << ',' << pct(s.mean_f1) << ','
                << pct(s.median_f1) << ',' << (s.failures ? "failed" : "ok") << '\n';
        }
    }
    return out.str();
}

}  // namespace memclust
