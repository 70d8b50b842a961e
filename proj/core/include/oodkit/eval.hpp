#ifndef OODKIT_EVAL_HPP
#define OODKIT_EVAL_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oodkit/distance.hpp"
#include "oodkit/embedding.hpp"
#include "oodkit/manifest.hpp"

namespace oodkit {

/// Scores with the fixed orientation "higher = more OOD".
struct ScoreSet {
    std::vector<double> id_scores;
    std::vector<double> ood_scores;
};

/// Mann-Whitney statistic in half-pair units: 2 * #(ood > id) + #(ood == id).
struct AurocCounts {
    std::uint64_t twice_wins = 0;
    std::uint64_t tied_pairs = 0;
    std::uint64_t pairs = 0;  // |id| * |ood|

    double value() const { return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pairs)); }
};

/// Midrank computation of the statistic. Throws ParameterError on an empty
/// side and DataError on a non-finite score.
AurocCounts auroc_counts(const ScoreSet& scores);

/// P(ood > id) + P(ood == id) / 2.
double auroc(const ScoreSet& scores);

struct DetectorSpec {
    enum class Kind { lof, ssd };
    Kind kind = Kind::lof;
    std::size_t k = 10;
    Metric metric = Metric::cosine;
    std::optional<double> epsilon;  // ssd only; unset = scale-aware default

    std::string label() const;  // "K = 10" or "SSD"
};

struct ExperimentConfig {
    std::string name;
    DetectorSpec detector;
    SubsetFilter fit_filter;
    SubsetFilter id_eval_filter;
    SubsetFilter ood_eval_filter;
    bool normalize = false;        // L2-normalize rows before fitting/scoring
    std::string embeddings_path;   // echoed into reports only
};

struct ScoreSummary {
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
};

struct EvalReport {
    ExperimentConfig config;
    double auroc = 0.0;
    std::size_t n_fit = 0;
    std::size_t n_id = 0;
    std::size_t n_ood = 0;
    ScoreSummary id_summary;
    ScoreSummary ood_summary;
    std::uint64_t tied_pairs = 0;
    double epsilon_used = 0.0;  // ssd only
    std::vector<std::string> notes;
};

ScoreSummary summarize(const std::vector<double>& scores);

/// Fits the configured detector on the fit selection and evaluates AUROC of
/// the ood selection against the id selection. Throws EmptySelectionError
/// or LeakageError before any fitting happens.
EvalReport run_experiment(const ExperimentConfig& config, const SampleManifest& manifest,
                          const EmbeddingMatrix& embeddings, std::size_t workers = 0);

/// One LOF report per entry of `ks`, in order. Neighbor search is done once
/// at max(ks) and every K reads a prefix, so results equal independent runs.
std::vector<EvalReport> k_sweep(const ExperimentConfig& base, const std::vector<std::size_t>& ks,
                                const SampleManifest& manifest, const EmbeddingMatrix& embeddings,
                                std::size_t workers = 0);

/// Throws LeakageError when a sample id appears in both.
void check_disjoint(const SampleManifest& fit, const SampleManifest& eval, const std::string& what);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
void write_report(const EvalReport& report, const std::filesystem::path& path);

/// Pivot of reports into a table: one row per detector label, one column
/// per experiment name, cells are AUROC with three decimals.
std::string reports_to_table_csv(const std::vector<EvalReport>& reports);

/// External baseline quoted alongside HAM results; nothing computes it.
inline constexpr double kSupervisedHamReferenceAuroc = 0.800;

}  // namespace oodkit

#endif  // OODKIT_EVAL_HPP
