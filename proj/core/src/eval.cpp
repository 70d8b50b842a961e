#include "oodkit/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "oodkit/errors.hpp"
#include "oodkit/gaussian.hpp"
#include "oodkit/knn.hpp"
#include "oodkit/lof.hpp"
#include "oodkit/parallel.hpp"

namespace oodkit {

using nlohmann::json;

AurocCounts auroc_counts(const ScoreSet& scores) {
    const auto n_id = scores.id_scores.size();
    const auto n_ood = scores.ood_scores.size();
    if (n_id == 0 || n_ood == 0) throw ParameterError("AUROC needs at least one ID and one OOD score");

    std::vector<std::pair<double, bool>> all;  // (score, is_ood)
    all.reserve(n_id + n_ood);
    for (double s : scores.id_scores) all.emplace_back(s, false);
    for (double s : scores.ood_scores) all.emplace_back(s, true);
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (!std::isfinite(all[i].first)) throw DataError("non-finite score", i);
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    // Twice the OOD rank sum, with tied runs sharing their midrank.
    std::uint64_t twice_rank_sum = 0;
    AurocCounts out;
    std::size_t pos = 0;
    while (pos < all.size()) {
        std::size_t end = pos;
        std::uint64_t ood_in_run = 0;
        while (end < all.size() && all[end].first == all[pos].first) {
            ood_in_run += all[end].second ? 1 : 0;
            ++end;
        }
        const std::uint64_t run = end - pos;
        const std::uint64_t twice_midrank = 2 * pos + run + 1;  // ranks pos+1 .. end
        twice_rank_sum += ood_in_run * twice_midrank;
        out.tied_pairs += ood_in_run * (run - ood_in_run);
        pos = end;
    }
    const std::uint64_t m = n_ood;
    out.twice_wins = twice_rank_sum - m * (m + 1);
    out.pairs = static_cast<std::uint64_t>(n_id) * m;
    return out;
}

double auroc(const ScoreSet& scores) { return auroc_counts(scores).value(); }

std::string DetectorSpec::label() const {
    return kind == Kind::lof ? "K = " + std::to_string(k) : "SSD";
}

ScoreSummary summarize(const std::vector<double>& scores) {
    if (scores.empty()) return {};
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return {sorted.front(), median, sorted.back()};
}

void check_disjoint(const SampleManifest& fit, const SampleManifest& eval, const std::string& what) {
    std::unordered_set<std::string> ids;
    for (const auto& r : fit.records()) ids.insert(r.sample_id);
    std::size_t overlap = 0;
    std::string first;
    for (const auto& r : eval.records()) {
        if (ids.contains(r.sample_id)) {
            if (overlap++ == 0) first = r.sample_id;
        }
    }
    if (overlap) {
        throw LeakageError(std::to_string(overlap) + " sample(s) appear in both the fit set and the " + what +
                           " set (first: \"" + first + "\")");
    }
}

namespace {

struct Selections {
    SampleManifest fit;
    SampleManifest id;
    SampleManifest ood;
    EmbeddingMatrix fit_x;
    EmbeddingMatrix id_x;
    EmbeddingMatrix ood_x;
};

EmbeddingMatrix take(const EmbeddingMatrix& all, const SampleManifest& sel, bool normalize) {
    auto m = all.select(sel.source_rows());
    return normalize ? l2_normalize(m) : m;
}

Selections select(const ExperimentConfig& config, const SampleManifest& manifest, const EmbeddingMatrix& embeddings) {
    if (manifest.size() != embeddings.rows()) {
        throw ParameterError("manifest has " + std::to_string(manifest.size()) + " records but the embedding file has " +
                             std::to_string(embeddings.rows()) + " rows");
    }
    auto fit = filter_subset(manifest, config.fit_filter);
    auto id = filter_subset(manifest, config.id_eval_filter);
    auto ood = filter_subset(manifest, config.ood_eval_filter);
    check_disjoint(fit, id, "ID evaluation");
    check_disjoint(fit, ood, "OOD evaluation");
    {
        std::unordered_set<std::string> ids;
        for (const auto& r : id.records()) ids.insert(r.sample_id);
        for (const auto& r : ood.records()) {
            if (ids.contains(r.sample_id)) {
                throw ParameterError("sample \"" + r.sample_id + "\" is selected as both ID and OOD");
            }
        }
    }
    auto fit_x = take(embeddings, fit, config.normalize);
    auto id_x = take(embeddings, id, config.normalize);
    auto ood_x = take(embeddings, ood, config.normalize);
    return {std::move(fit), std::move(id), std::move(ood), std::move(fit_x), std::move(id_x), std::move(ood_x)};
}

EvalReport make_report(const ExperimentConfig& config, const Selections& sel, std::vector<double> id_scores,
                       std::vector<double> ood_scores) {
    EvalReport r;
    r.config = config;
    ScoreSet set{std::move(id_scores), std::move(ood_scores)};
    auto counts = auroc_counts(set);
    r.auroc = counts.value();
    r.tied_pairs = counts.tied_pairs;
    r.n_fit = sel.fit.size();
    r.n_id = sel.id.size();
    r.n_ood = sel.ood.size();
    r.id_summary = summarize(set.id_scores);
    r.ood_summary = summarize(set.ood_scores);
    r.notes.push_back("orientation: higher score = more OOD");
    r.notes.push_back(config.normalize ? "features: rows L2-normalized before fitting and scoring"
                                       : "features: used as stored, no L2 normalization");
    if (config.detector.kind == DetectorSpec::Kind::lof) {
        r.notes.push_back("detector: LOF novelty mode, metric " + std::string(to_string(config.detector.metric)) +
                          ", reachability distances clamped below at 1e-12");
    } else {
        r.notes.push_back("detector: single-Gaussian Mahalanobis (one mean/covariance pair, no cluster conditioning)");
    }
    r.notes.push_back("tied ID/OOD score pairs: " + std::to_string(counts.tied_pairs));
    return r;
}

void require_lof_k(std::size_t k, std::size_t n_fit) {
    if (k == 0 || k >= n_fit) {
        throw ParameterError("LOF needs 1 <= K < fit-set size (K = " + std::to_string(k) +
                             ", fit set = " + std::to_string(n_fit) + ")");
    }
}

}  // namespace

EvalReport run_experiment(const ExperimentConfig& config, const SampleManifest& manifest,
                          const EmbeddingMatrix& embeddings, std::size_t workers) {
    auto sel = select(config, manifest, embeddings);
    if (config.detector.kind == DetectorSpec::Kind::lof) {
        require_lof_k(config.detector.k, sel.fit.size());
        auto model = fit_lof(sel.fit_x, config.detector.k, config.detector.metric, workers);
        return make_report(config, sel, lof_score_batch(sel.id_x, model, workers),
                           lof_score_batch(sel.ood_x, model, workers));
    }
    auto stats = fit_gaussian(sel.fit_x, config.detector.epsilon);
    auto report = make_report(config, sel, mahalanobis_score_batch(sel.id_x, stats, workers),
                              mahalanobis_score_batch(sel.ood_x, stats, workers));
    report.epsilon_used = stats.epsilon();
    report.notes.push_back(std::string("epsilon: ") + (config.detector.epsilon ? "user-specified " : "default 1e-3*trace/d = ") +
                           std::to_string(stats.epsilon()));
    return report;
}

std::vector<EvalReport> k_sweep(const ExperimentConfig& base, const std::vector<std::size_t>& ks,
                                const SampleManifest& manifest, const EmbeddingMatrix& embeddings,
                                std::size_t workers) {
    if (base.detector.kind != DetectorSpec::Kind::lof) throw ParameterError("a K sweep needs the LOF detector");
    if (ks.empty()) throw ParameterError("a K sweep needs at least one K");
    auto sel = select(base, manifest, embeddings);
    const std::size_t kmax = *std::max_element(ks.begin(), ks.end());
    for (auto k : ks) require_lof_k(k, sel.fit.size());

    const Metric metric = base.detector.metric;
    require_nondegenerate(sel.fit_x, metric);
    auto self_table = knn_self_table(sel.fit_x, kmax, metric, workers);
    auto id_table = knn_table(sel.id_x, sel.fit_x, kmax, metric, workers);
    auto ood_table = knn_table(sel.ood_x, sel.fit_x, kmax, metric, workers);

    std::vector<EvalReport> reports;
    reports.reserve(ks.size());
    for (auto k : ks) {
        LofModel model(sel.fit_x, k, metric, self_table);
        ExperimentConfig config = base;
        config.detector.k = k;
        reports.push_back(make_report(config, sel, lof_scores_from_table(id_table, model, workers),
                                      lof_scores_from_table(ood_table, model, workers)));
        reports.back().notes.push_back("neighbor search shared across the sweep (computed once at K = " +
                                       std::to_string(kmax) + ")");
    }
    return reports;
}

namespace {

json filter_json(const SubsetFilter& f) {
    json j;
    j["classes"] = f.classes;
    j["sources"] = f.sources;
    j["split"] = f.split ? json(std::string(to_string(*f.split))) : json(nullptr);
    return j;
}

SubsetFilter filter_from_json(const json& j) {
    SubsetFilter f;
    f.classes = j.at("classes").get<std::set<std::string>>();
    f.sources = j.at("sources").get<std::set<std::string>>();
    if (!j.at("split").is_null()) f.split = parse_split(j.at("split").get<std::string>());
    return f;
}

json summary_json(const ScoreSummary& s) { return {{"min", s.min}, {"median", s.median}, {"max", s.max}}; }

ScoreSummary summary_from_json(const json& j) {
    return {j.at("min").get<double>(), j.at("median").get<double>(), j.at("max").get<double>()};
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
    const auto& c = report.config;
    json det;
    if (c.detector.kind == DetectorSpec::Kind::lof) {
        det = {{"kind", "lof"}, {"k", c.detector.k}, {"metric", std::string(to_string(c.detector.metric))}};
    } else {
        det = {{"kind", "ssd"},
               {"variant", "single-gaussian"},
               {"epsilon", c.detector.epsilon ? json(*c.detector.epsilon) : json(nullptr)},
               {"epsilon_used", report.epsilon_used}};
    }
    json j;
    j["name"] = c.name;
    j["label"] = c.detector.label();
    j["detector"] = det;
    j["fit_filter"] = filter_json(c.fit_filter);
    j["id_eval_filter"] = filter_json(c.id_eval_filter);
    j["ood_eval_filter"] = filter_json(c.ood_eval_filter);
    j["normalize"] = c.normalize;
    j["embeddings"] = c.embeddings_path;
    j["orientation"] = "higher score = more OOD";
    j["auroc"] = report.auroc;
    j["n_fit"] = report.n_fit;
    j["n_id"] = report.n_id;
    j["n_ood"] = report.n_ood;
    j["id_scores"] = summary_json(report.id_summary);
    j["ood_scores"] = summary_json(report.ood_summary);
    j["tied_pairs"] = report.tied_pairs;
    j["notes"] = report.notes;
    return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
        EvalReport r;
        auto& c = r.config;
        c.name = j.at("name").get<std::string>();
        const auto& det = j.at("detector");
        if (det.at("kind") == "lof") {
            c.detector.kind = DetectorSpec::Kind::lof;
            c.detector.k = det.at("k").get<std::size_t>();
            c.detector.metric = parse_metric(det.at("metric").get<std::string>());
        } else if (det.at("kind") == "ssd") {
            c.detector.kind = DetectorSpec::Kind::ssd;
            if (!det.at("epsilon").is_null()) c.detector.epsilon = det.at("epsilon").get<double>();
            r.epsilon_used = det.at("epsilon_used").get<double>();
        } else {
            throw FormatError("unknown detector kind");
        }
        c.fit_filter = filter_from_json(j.at("fit_filter"));
        c.id_eval_filter = filter_from_json(j.at("id_eval_filter"));
        c.ood_eval_filter = filter_from_json(j.at("ood_eval_filter"));
        c.normalize = j.at("normalize").get<bool>();
        c.embeddings_path = j.at("embeddings").get<std::string>();
        r.auroc = j.at("auroc").get<double>();
        r.n_fit = j.at("n_fit").get<std::size_t>();
        r.n_id = j.at("n_id").get<std::size_t>();
        r.n_ood = j.at("n_ood").get<std::size_t>();
        r.id_summary = summary_from_json(j.at("id_scores"));
        r.ood_summary = summary_from_json(j.at("ood_scores"));
        r.tied_pairs = j.at("tied_pairs").get<std::uint64_t>();
        r.notes = j.at("notes").get<std::vector<std::string>>();
        if (!(r.auroc >= 0.0 && r.auroc <= 1.0)) throw FormatError("auroc outside [0, 1]");
        return r;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed report: ") + e.what());
    }
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << report_to_json(report);
    if (!out) throw Error("write failed: " + path.string());
}

std::string reports_to_table_csv(const std::vector<EvalReport>& reports) {
    std::vector<std::string> columns;
    // LOF rows by K, then SSD
    auto row_key = [](const DetectorSpec& d) {
        return d.kind == DetectorSpec::Kind::lof ? std::pair<int, std::size_t>{0, d.k} : std::pair<int, std::size_t>{1, 0};
    };
    std::map<std::pair<int, std::size_t>, std::map<std::string, double>> cells;
    std::map<std::pair<int, std::size_t>, std::string> labels;
    for (const auto& r : reports) {
        const auto& name = r.config.name;
        if (std::find(columns.begin(), columns.end(), name) == columns.end()) columns.push_back(name);
        auto key = row_key(r.config.detector);
        labels[key] = r.config.detector.label();
        cells[key][name] = r.auroc;
    }
    std::ostringstream out;
    out << "detector";
    for (const auto& c : columns) out << ',' << c;
    out << '\n';
    for (const auto& [key, row] : cells) {
        out << labels[key];
        for (const auto& c : columns) {
            out << ',';
            if (auto it = row.find(c); it != row.end()) out << format_double(it->second);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace oodkit
