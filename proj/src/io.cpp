#include "alp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace alp {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json checkpoint_to_json(const FrozenPolicy& policy, int step) {
    const PolicyParams& p = policy.params;
    json weights = json::array();
    for (std::size_t b = 0; b < p.num_bins(); ++b) {
        const auto row = p.weights.row(b);
        weights.push_back(std::vector<double>(row.begin(), row.end()));
    }
    json j;
    j["format"] = kCheckpointFormat;
    j["version"] = kCheckpointVersion;
    j["step"] = step;
    j["bins"] = p.bins;
    j["feature_dim"] = p.feature_dim();
    j["forced_bin"] = policy.forced_bin ? json(*policy.forced_bin) : json(nullptr);
    j["weights"] = std::move(weights);
    return j;
}

FrozenPolicy checkpoint_from_json(const json& j) {
    const auto fail = [](const std::string& what) {
        throw std::invalid_argument("checkpoint: " + what);
    };
    if (!j.is_object()) fail("expected a JSON object");
    if (j.value("format", std::string()) != kCheckpointFormat) fail("unrecognised format tag");
    if (!j.contains("version") || !j["version"].is_number_integer() ||
        j["version"].get<int>() != kCheckpointVersion)
        fail("unsupported version");
    if (!j.contains("bins") || !j["bins"].is_array()) fail("missing bins");
    if (!j.contains("feature_dim") || !j["feature_dim"].is_number_unsigned()) fail("missing feature_dim");
    if (!j.contains("weights") || !j["weights"].is_array()) fail("missing weights");

    FrozenPolicy policy;
    PolicyParams& p = policy.params;
    for (const auto& b : j["bins"]) {
        if (!b.is_number_integer()) fail("bins must be integers");
        p.bins.push_back(b.get<int>());
    }
    const auto dim = j["feature_dim"].get<std::size_t>();
    const auto& rows = j["weights"];
    if (rows.size() != p.bins.size()) fail("weights must have one row per bin");
    p.weights = Matrix(p.bins.size(), dim);
    for (std::size_t b = 0; b < rows.size(); ++b) {
        if (!rows[b].is_array() || rows[b].size() != dim) fail("weight row has wrong length");
        for (std::size_t f = 0; f < dim; ++f) {
            if (!rows[b][f].is_number()) fail("weights must be numbers");
            p.weights(b, f) = rows[b][f].get<double>();
        }
    }
    p.validate();
    if (j.contains("forced_bin") && !j["forced_bin"].is_null()) {
        if (!j["forced_bin"].is_number_unsigned()) fail("forced_bin must be an index or null");
        const auto fb = j["forced_bin"].get<std::size_t>();
        if (fb >= p.num_bins()) fail("forced_bin out of range");
        policy.forced_bin = fb;
    }
    return policy;
}

void save_checkpoint(const std::filesystem::path& path, const FrozenPolicy& policy, int step) {
    write_file_atomic(path, checkpoint_to_json(policy, step).dump(2) + "\n");
}

FrozenPolicy load_checkpoint(const std::filesystem::path& path) {
    const json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw std::invalid_argument("checkpoint: not valid JSON");
    return checkpoint_from_json(j);
}

void write_train_log_csv(std::ostream& out, const TrainLog& log) {
    out << kTrainLogHeader << '\n';
    for (const auto& r : log.records) {
        out << r.step << ',' << format_double(r.mean_reward) << ',' << format_double(r.mean_length)
            << ',' << format_double(r.mean_solve_rate) << ',' << format_double(r.mean_accuracy) << ','
            << format_double(r.grad_norm) << ',' << format_double(r.mean_length_easy) << ','
            << format_double(r.mean_length_hard) << '\n';
    }
}

json report_to_json(const MetricsReport& report) {
    json points = json::array();
    for (const auto& p : report.pareto_points) points.push_back({p.problem_frac, p.token_frac});
    json buckets = json::array();
    for (const auto& b : report.bucket_table)
        buckets.push_back({{"difficulty_lo", b.lo},
                           {"difficulty_hi", b.hi},
                           {"mean_tokens", b.mean_tokens},
                           {"count", b.count}});
    json j;
    j["n_problems"] = report.n_problems;
    j["pass_at_1"] = report.pass_at_1;
    j["mean_tokens"] = report.mean_tokens;
    j["adaptation_ratio"] = report.adaptation_ratio ? json(*report.adaptation_ratio) : json(nullptr);
    j["efficiency_score"] = report.efficiency_score;
    j["pareto_points"] = std::move(points);
    j["bucket_table"] = std::move(buckets);
    return j;
}

void write_pareto_csv(std::ostream& out, std::span<const ParetoPoint> points) {
    out << kParetoHeader << '\n';
    for (const auto& p : points)
        out << format_double(p.problem_frac) << ',' << format_double(p.token_frac) << '\n';
}

void write_bucket_csv(std::ostream& out, std::span<const BucketRow> rows) {
    out << kBucketHeader << '\n';
    for (const auto& r : rows)
        out << format_double(r.lo) << ',' << format_double(r.hi) << ',' << format_double(r.mean_tokens)
            << ',' << r.count << '\n';
}

void write_problem_csv(std::ostream& out, const Evaluation& evaluation) {
    out << kProblemHeader << '\n';
    for (std::size_t i = 0; i < evaluation.stats.size(); ++i) {
        const Task& t = evaluation.tasks[i];
        const ProblemStats& s = evaluation.stats[i];
        out << s.task_id << ',' << to_string(t.pool) << ',' << format_double(t.difficulty) << ','
            << format_double(t.feature) << ',' << format_double(s.solve_rate) << ','
            << format_double(s.mean_tokens) << ',' << s.n_samples << '\n';
    }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << kSweepHeader << '\n';
    for (const auto& r : rows)
        out << format_double(r.hard_fraction) << ',' << format_double(r.pass_at_1) << ','
            << format_double(r.mean_tokens) << '\n';
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_behavior_row(std::ostream& out, const TraceRecord& record, const BehaviorCounts& counts) {
    out << csv_escape(record.problem_id) << ',';
    if (record.correct) out << (*record.correct ? "true" : "false");
    out << ',';
    if (record.token_count) out << *record.token_count;
    for (BehaviorCategory c : kAllCategories) out << ',' << counts.get(c);
    out << '\n';
}

json corpus_report_to_json(const CorpusReport& report) {
    json means = json::object();
    json totals = json::object();
    for (BehaviorCategory c : kAllCategories) {
        const auto m = report.mean(c);
        means[to_string(c)] = m ? json(*m) : json(nullptr);
        totals[to_string(c)] = report.totals.get(c);
    }
    json j;
    j["records"] = report.records;
    j["rejects"] = report.rejects;
    j["means"] = std::move(means);
    j["totals"] = std::move(totals);
    return j;
}

}  // namespace alp
