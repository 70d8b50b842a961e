// oodkit: command-line front end for fitting, scoring and evaluating OOD detectors
// on embedding files. Run `oodkit --help` or `oodkit <command> --help`.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oodkit/contrastive.hpp"
#include "oodkit/embedding.hpp"
#include "oodkit/errors.hpp"
#include "oodkit/eval.hpp"
#include "oodkit/gaussian.hpp"
#include "oodkit/lof.hpp"
#include "oodkit/manifest.hpp"
#include "oodkit/model_io.hpp"
#include "oodkit/parallel.hpp"
#include "oodkit/protocols.hpp"
#include "oodkit/split.hpp"
#include "oodkit/synthetic.hpp"

namespace fs = std::filesystem;
using namespace oodkit;

namespace {

constexpr std::uint64_t kDefaultSeed = 2019;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::set<std::string> parse_set(const std::string& csv) {
    std::set<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(item);
    }
    return out;
}

std::optional<Split> parse_split_flag(const std::string& value) {
    if (value.empty() || value == "any") return std::nullopt;
    try {
        return parse_split(value);
    } catch (const FormatError&) {
        throw UsageError("unknown split \"" + value + "\" (expected train, val, test, unassigned or any)");
    }
}

struct FilterFlags {
    std::string classes;
    std::string sources;
    std::string split;

    void bind(CLI::App* cmd, const std::string& prefix, const std::string& what, const std::string& default_split) {
        split = default_split;
        cmd->add_option("--" + prefix + "classes", classes, "Comma-separated class labels for the " + what + " set");
        cmd->add_option("--" + prefix + "sources", sources, "Comma-separated sources for the " + what + " set");
        cmd->add_option("--" + prefix + "split", split, "Split for the " + what + " set (train|val|test|any)")
            ->capture_default_str();
    }

    SubsetFilter filter() const { return {parse_set(classes), parse_set(sources), parse_split_flag(split)}; }
};

// Writes through a temporary sibling so a failed command leaves no partial output.
template <typename WriteFn>
void write_atomically(const fs::path& target, WriteFn&& write) {
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".partial";
    try {
        write(tmp);
        fs::rename(tmp, target);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

void write_text(const fs::path& target, const std::string& text) {
    write_atomically(target, [&](const fs::path& p) {
        std::ofstream out(p, std::ios::binary);
        out << text;
        if (!out) throw Error("write failed: " + p.string());
    });
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

EmbeddingMatrix load_any_embeddings(const fs::path& path) { return load_embeddings(path, format_from_path(path)); }

void require_aligned(const SampleManifest& manifest, const EmbeddingMatrix& embeddings) {
    if (manifest.size() != embeddings.rows()) {
        throw ParameterError("manifest has " + std::to_string(manifest.size()) + " records but the embedding file has " +
                             std::to_string(embeddings.rows()) + " rows");
    }
}

std::vector<std::string> ids_of(const SampleManifest& m) {
    std::vector<std::string> ids;
    ids.reserve(m.size());
    for (const auto& r : m.records()) ids.push_back(r.sample_id);
    return ids;
}

SampleManifest manifest_from_ids(const std::vector<std::string>& ids) {
    std::vector<SampleRecord> records;
    for (const auto& id : ids) records.push_back({id, id, "", "", Split::unassigned});
    return SampleManifest(std::move(records));
}

std::string summary_line(const EvalReport& r) {
    std::ostringstream s;
    s << r.config.name << " [" << r.config.detector.label() << "] AUROC = " << r.auroc << " (n_fit=" << r.n_fit
      << ", n_id=" << r.n_id << ", n_ood=" << r.n_ood << ")";
    if (auto ref = reference_auroc(r.config.name, r.config.detector.label())) {
        s << "  full-scale reference " << *ref;
    }
    return s.str();
}

// ---------------------------------------------------------------- split

struct SplitArgs {
    std::string manifest;
    std::string ratios = "0.8,0.05,0.15";
    std::uint64_t seed = kDefaultSeed;
    std::string out;
};

int cmd_split(const SplitArgs& a) {
    std::vector<double> r;
    std::stringstream ss(a.ratios);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            r.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("--ratios must be three comma-separated numbers, got \"" + a.ratios + "\"");
        }
    }
    if (r.size() != 3) throw UsageError("--ratios must be three comma-separated numbers");
    if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9 || r[0] < 0 || r[1] < 0 || r[2] < 0) {
        throw UsageError("--ratios must be non-negative and sum to 1");
    }

    auto manifest = read_manifest(a.manifest);
    auto assignment = stratified_group_split(manifest, {r[0], r[1], r[2]}, a.seed);
    auto out = assignment.apply(manifest);
    write_atomically(a.out, [&](const fs::path& p) { write_manifest(out, p); });

    std::cout << "class,source,train_groups,val_groups,test_groups,train_samples,val_samples,test_samples\n";
    for (const auto& s : assignment.strata) {
        std::cout << s.class_label << ',' << s.source << ',' << s.groups[0] << ',' << s.groups[1] << ',' << s.groups[2]
                  << ',' << s.samples[0] << ',' << s.samples[1] << ',' << s.samples[2] << '\n';
    }
    for (const auto& w : assignment.warnings) std::cerr << "warning: " << w << '\n';
    return 0;
}

// ---------------------------------------------------------------- fit

struct DetectorFlags {
    std::string detector = "lof";
    std::size_t k = 10;
    std::string metric = "cosine";
    std::optional<double> epsilon;
    bool normalize = false;

    void bind(CLI::App* cmd) {
        cmd->add_option("--detector", detector, "lof or ssd")->check(CLI::IsMember({"lof", "ssd"}))->capture_default_str();
        cmd->add_option("--k", k, "LOF neighborhood size")
            ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()))
            ->capture_default_str();
        cmd->add_option("--metric", metric, "LOF distance")->check(CLI::IsMember({"cosine", "euclidean"}))->capture_default_str();
        cmd->add_option("--epsilon", epsilon, "SSD diagonal loading (default 1e-3*trace/d)")->check(CLI::NonNegativeNumber);
        cmd->add_flag("--normalize", normalize, "L2-normalize rows before fitting and scoring");
    }

    DetectorSpec spec() const {
        DetectorSpec d;
        d.kind = detector == "lof" ? DetectorSpec::Kind::lof : DetectorSpec::Kind::ssd;
        d.k = k;
        d.metric = parse_metric(metric);
        d.epsilon = epsilon;
        return d;
    }
};

struct FitArgs {
    std::string embeddings;
    std::string manifest;
    DetectorFlags detector;
    FilterFlags filter;
    std::string out;
};

int cmd_fit(const FitArgs& a) {
    auto embeddings = load_any_embeddings(a.embeddings);
    auto manifest = read_manifest(a.manifest);
    require_aligned(manifest, embeddings);
    auto selection = filter_subset(manifest, a.filter.filter());
    auto x = embeddings.select(selection.source_rows());
    if (a.detector.normalize) x = l2_normalize(x);
    FitMetadata meta{ids_of(selection), a.detector.normalize};

    auto spec = a.detector.spec();
    if (spec.kind == DetectorSpec::Kind::lof) {
        auto model = fit_lof(x, spec.k, spec.metric, default_workers());
        write_atomically(a.out, [&](const fs::path& p) { save_lof(model, meta, p); });
        std::cout << "fitted LOF (K=" << spec.k << ", " << to_string(spec.metric) << ") on " << x.rows() << " samples\n";
    } else {
        auto stats = fit_gaussian(x, spec.epsilon);
        write_atomically(a.out, [&](const fs::path& p) { save_gaussian(stats, meta, p); });
        std::cout << "fitted single-Gaussian Mahalanobis (epsilon=" << stats.epsilon() << ") on " << x.rows()
                  << " samples\n";
    }
    return 0;
}

// ---------------------------------------------------------------- loaded models

struct LoadedModel {
    ModelKind kind;
    std::optional<LofModel> lof;
    std::optional<GaussianStats> ssd;
    FitMetadata meta;

    std::vector<double> score(const EmbeddingMatrix& x) const {
        const EmbeddingMatrix q = meta.normalized ? l2_normalize(x) : x;
        return kind == ModelKind::lof ? lof_score_batch(q, *lof, default_workers())
                                      : mahalanobis_score_batch(q, *ssd, default_workers());
    }

    DetectorSpec spec() const {
        DetectorSpec d;
        if (kind == ModelKind::lof) {
            d.kind = DetectorSpec::Kind::lof;
            d.k = lof->k();
            d.metric = lof->metric();
        } else {
            d.kind = DetectorSpec::Kind::ssd;
            d.epsilon = ssd->epsilon();
        }
        return d;
    }
};

LoadedModel load_model(const fs::path& path) {
    LoadedModel m;
    m.kind = detect_model_kind(path);
    if (m.kind == ModelKind::lof) {
        m.lof = load_lof(path, &m.meta);
    } else {
        m.ssd = load_gaussian(path, &m.meta);
    }
    return m;
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
    std::string model;
    std::string embeddings;
    std::string manifest;
    FilterFlags filter;
    std::string out;
};

int cmd_score(const ScoreArgs& a) {
    auto model = load_model(a.model);
    auto embeddings = load_any_embeddings(a.embeddings);
    std::vector<std::size_t> rows;
    std::vector<std::string> ids;
    if (!a.manifest.empty()) {
        auto manifest = read_manifest(a.manifest);
        require_aligned(manifest, embeddings);
        auto sel = filter_subset(manifest, a.filter.filter());
        rows = sel.source_rows();
        ids = ids_of(sel);
    } else {
        for (std::size_t i = 0; i < embeddings.rows(); ++i) rows.push_back(i);
    }
    auto scores = model.score(embeddings.select(rows));
    std::ostringstream out;
    out.precision(17);
    out << "row,sample_id,score\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << rows[i] << ',' << (ids.empty() ? "" : ids[i]) << ',' << scores[i] << '\n';
    }
    write_text(a.out, out.str());
    std::cout << "scored " << rows.size() << " samples\n";
    return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string model;
    std::string embeddings;
    std::string manifest;
    std::string name = "eval";
    FilterFlags id;
    FilterFlags ood;
    std::string out;
};

int cmd_eval(const EvalArgs& a) {
    auto model = load_model(a.model);
    auto embeddings = load_any_embeddings(a.embeddings);
    auto manifest = read_manifest(a.manifest);
    require_aligned(manifest, embeddings);

    ExperimentConfig config;
    config.name = a.name;
    config.detector = model.spec();
    config.id_eval_filter = a.id.filter();
    config.ood_eval_filter = a.ood.filter();
    config.normalize = model.meta.normalized;
    config.embeddings_path = a.embeddings;

    auto id_sel = filter_subset(manifest, config.id_eval_filter);
    auto ood_sel = filter_subset(manifest, config.ood_eval_filter);
    auto fit_ids = manifest_from_ids(model.meta.fit_ids);
    check_disjoint(fit_ids, id_sel, "ID evaluation");
    check_disjoint(fit_ids, ood_sel, "OOD evaluation");

    ScoreSet scores{model.score(embeddings.select(id_sel.source_rows())),
                    model.score(embeddings.select(ood_sel.source_rows()))};
    auto counts = auroc_counts(scores);

    EvalReport report;
    report.config = config;
    report.auroc = counts.value();
    report.tied_pairs = counts.tied_pairs;
    report.n_fit = model.meta.fit_ids.size();
    report.n_id = id_sel.size();
    report.n_ood = ood_sel.size();
    report.id_summary = summarize(scores.id_scores);
    report.ood_summary = summarize(scores.ood_scores);
    if (model.kind == ModelKind::ssd) report.epsilon_used = model.ssd->epsilon();
    report.notes = {"orientation: higher score = more OOD",
                    "fit set: " + std::to_string(report.n_fit) + " samples recorded in " + a.model,
                    std::string("features: ") + (config.normalize ? "rows L2-normalized" : "used as stored"),
                    "tied ID/OOD score pairs: " + std::to_string(counts.tied_pairs)};
    if (model.kind == ModelKind::ssd) {
        report.notes.push_back("detector: single-Gaussian Mahalanobis (one mean/covariance pair, no cluster conditioning)");
    }
    write_atomically(a.out, [&](const fs::path& p) { write_report(report, p); });
    std::cout << summary_line(report) << '\n';
    return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    std::string embeddings;
    std::string manifest;
    std::string protocol;
    std::string name = "custom";
    std::vector<std::size_t> ks;
    std::string metric = "cosine";
    bool normalize = false;
    bool with_ssd = false;
    std::optional<double> epsilon;
    FilterFlags fit;
    FilterFlags id;
    FilterFlags ood;
    std::string out_dir;
};

int cmd_sweep(const SweepArgs& a) {
    DetectorSpec lof;
    lof.kind = DetectorSpec::Kind::lof;
    lof.metric = parse_metric(a.metric);

    ExperimentConfig base;
    if (!a.protocol.empty()) {
        base = protocol_config(a.protocol, lof);
    } else {
        base.name = a.name;
        base.detector = lof;
        base.fit_filter = a.fit.filter();
        base.id_eval_filter = a.id.filter();
        base.ood_eval_filter = a.ood.filter();
    }
    base.normalize = a.normalize;
    base.embeddings_path = a.embeddings;
    auto ks = a.ks.empty() ? protocol_default_ks(base.name) : a.ks;

    auto embeddings = load_any_embeddings(a.embeddings);
    auto manifest = read_manifest(a.manifest);
    auto reports = k_sweep(base, ks, manifest, embeddings, default_workers());
    if (a.with_ssd) {
        ExperimentConfig ssd = base;
        ssd.detector.kind = DetectorSpec::Kind::ssd;
        ssd.detector.epsilon = a.epsilon;
        reports.push_back(run_experiment(ssd, manifest, embeddings, default_workers()));
    }

    fs::path dir(a.out_dir);
    fs::create_directories(dir);
    for (const auto& r : reports) {
        std::string stem = r.config.detector.kind == DetectorSpec::Kind::lof ? "K" + std::to_string(r.config.detector.k) : "SSD";
        write_atomically(dir / (base.name + "_" + stem + ".json"), [&](const fs::path& p) { write_report(r, p); });
        std::cout << summary_line(r) << '\n';
    }
    write_text(dir / (base.name + "_table.csv"), reports_to_table_csv(reports));
    return 0;
}

// ---------------------------------------------------------------- toy-train

struct ToyArgs {
    std::string data;
    std::size_t synthetic_n = 256;
    std::size_t hidden = 32;
    std::size_t dim = 8;
    ToyTrainingConfig train;
    std::string out;
    std::string curve;
    std::string embed_out;
};

int cmd_toy_train(const ToyArgs& a) {
    auto data = a.data.empty() ? two_cluster_data(a.synthetic_n, a.train.seed) : load_any_embeddings(a.data);
    auto init = ToyEncoderParams::init(data.cols(), a.hidden, a.dim, a.train.seed);
    auto result = train_toy_encoder(data, init, a.train);
    write_atomically(a.out, [&](const fs::path& p) { save_toy_encoder(result.params, p); });
    if (!a.curve.empty()) write_atomically(a.curve, [&](const fs::path& p) { write_training_curve(result.epoch_loss, p); });
    if (!a.embed_out.empty()) {
        auto z = result.params.encode(data);
        write_atomically(a.embed_out, [&](const fs::path& p) { save_embeddings(z, p); });
    }
    std::cout << "epoch 1 mean loss " << result.epoch_loss.front() << ", epoch " << result.epoch_loss.size()
              << " mean loss " << result.epoch_loss.back() << '\n';
    return 0;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string out;
};

int cmd_report(const ReportArgs& a) {
    std::vector<EvalReport> reports;
    for (const auto& path : a.inputs) reports.push_back(report_from_json(read_text(path)));
    auto table = reports_to_table_csv(reports);
    write_text(a.out, table);
    std::cout << table;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"oodkit: unsupervised out-of-distribution scoring on feature embeddings"};
    app.require_subcommand(1);
    app.footer("Environment: OODKIT_THREADS caps the number of worker threads.");

    SplitArgs split_args;
    auto* split = app.add_subcommand("split", "Assign leakage-free stratified train/val/test splits to a manifest");
    split->add_option("--manifest", split_args.manifest, "Input manifest CSV")->required()->check(CLI::ExistingFile);
    split->add_option("--ratios", split_args.ratios, "train,val,test fractions")->capture_default_str();
    split->add_option("--seed", split_args.seed, "Random seed")->capture_default_str();
    split->add_option("--out", split_args.out, "Output manifest CSV")->required();

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit a detector on a filtered selection and save the model");
    fit->add_option("--embeddings", fit_args.embeddings, "Embedding file (.oode binary or .csv)")->required()->check(CLI::ExistingFile);
    fit->add_option("--manifest", fit_args.manifest, "Manifest aligned with the embeddings")->required()->check(CLI::ExistingFile);
    fit_args.detector.bind(fit);
    fit_args.filter.bind(fit, "", "fit", "train");
    fit->add_option("--out", fit_args.out, "Output model file")->required();

    ScoreArgs score_args;
    auto* score = app.add_subcommand("score", "Score embeddings with a saved model");
    score->add_option("--model", score_args.model, "Model file")->required()->check(CLI::ExistingFile);
    score->add_option("--embeddings", score_args.embeddings, "Embedding file")->required()->check(CLI::ExistingFile);
    score->add_option("--manifest", score_args.manifest, "Optional manifest for filtering and ids")->check(CLI::ExistingFile);
    score_args.filter.bind(score, "", "scored", "any");
    score->add_option("--out", score_args.out, "Output CSV (row,sample_id,score)")->required();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Evaluate AUROC of an OOD selection against an ID selection");
    eval->add_option("--model", eval_args.model, "Model file")->required()->check(CLI::ExistingFile);
    eval->add_option("--embeddings", eval_args.embeddings, "Embedding file")->required()->check(CLI::ExistingFile);
    eval->add_option("--manifest", eval_args.manifest, "Manifest aligned with the embeddings")->required()->check(CLI::ExistingFile);
    eval->add_option("--name", eval_args.name, "Experiment name recorded in the report")->capture_default_str();
    eval_args.id.bind(eval, "id-", "ID evaluation", "test");
    eval_args.ood.bind(eval, "ood-", "OOD evaluation", "any");
    eval->add_option("--out", eval_args.out, "Output report JSON")->required();

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Run a LOF K-sweep (optionally plus SSD) for one protocol");
    sweep->add_option("--embeddings", sweep_args.embeddings, "Embedding file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--manifest", sweep_args.manifest, "Manifest aligned with the embeddings")->required()->check(CLI::ExistingFile);
    sweep->add_option("--protocol", sweep_args.protocol, "Named protocol")->check(CLI::IsMember(protocol_names()));
    sweep->add_option("--name", sweep_args.name, "Experiment name when no protocol is given")->capture_default_str();
    sweep->add_option("--ks", sweep_args.ks, "Comma-separated K values")
        ->delimiter(',')
        ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
    sweep->add_option("--metric", sweep_args.metric, "LOF distance")->check(CLI::IsMember({"cosine", "euclidean"}))->capture_default_str();
    sweep->add_flag("--normalize", sweep_args.normalize, "L2-normalize rows first");
    sweep->add_flag("--ssd", sweep_args.with_ssd, "Append a single-Gaussian Mahalanobis row");
    sweep->add_option("--epsilon", sweep_args.epsilon, "SSD diagonal loading")->check(CLI::NonNegativeNumber);
    sweep_args.fit.bind(sweep, "fit-", "fit", "train");
    sweep_args.id.bind(sweep, "id-", "ID evaluation", "test");
    sweep_args.ood.bind(sweep, "ood-", "OOD evaluation", "any");
    sweep->add_option("--out-dir", sweep_args.out_dir, "Directory for JSON reports and the table CSV")->required();

    ToyArgs toy_args;
    auto* toy = app.add_subcommand("toy-train", "Train the toy contrastive encoder");
    toy->add_option("--data", toy_args.data, "Input vectors (default: synthetic two-cluster 2-D data)")->check(CLI::ExistingFile);
    toy->add_option("--synthetic-n", toy_args.synthetic_n, "Samples of synthetic data")->capture_default_str();
    toy->add_option("--hidden", toy_args.hidden, "Hidden width")->capture_default_str();
    toy->add_option("--dim", toy_args.dim, "Embedding dimension")->capture_default_str();
    toy->add_option("--lr", toy_args.train.learning_rate, "Learning rate")->check(CLI::NonNegativeNumber)->capture_default_str();
    toy->add_option("--epochs", toy_args.train.epochs, "Epochs")->check(CLI::Range(std::size_t{1}, std::size_t{1000000}))->capture_default_str();
    toy->add_option("--batch", toy_args.train.batch_n, "Samples per batch")->check(CLI::Range(std::size_t{2}, std::size_t{100000}))->capture_default_str();
    toy->add_option("--tau", toy_args.train.tau, "NT-Xent temperature")->check(CLI::PositiveNumber)->capture_default_str();
    toy->add_option("--noise", toy_args.train.noise_scale, "View noise std-dev")->check(CLI::NonNegativeNumber)->capture_default_str();
    toy->add_option("--seed", toy_args.train.seed, "Random seed")->capture_default_str();
    toy->add_option("--out", toy_args.out, "Output parameter file")->required();
    toy->add_option("--curve", toy_args.curve, "Training curve CSV (epoch,mean_loss)");
    toy->add_option("--embed-out", toy_args.embed_out, "Write encoded training data as an embedding file");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "Aggregate report JSONs into a detector-by-experiment AUROC table");
    report->add_option("inputs", report_args.inputs, "Report JSON files")->required()->check(CLI::ExistingFile);
    report->add_option("--out", report_args.out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*split) return cmd_split(split_args);
        if (*fit) return cmd_fit(fit_args);
        if (*score) return cmd_score(score_args);
        if (*eval) return cmd_eval(eval_args);
        if (*sweep) return cmd_sweep(sweep_args);
        if (*toy) return cmd_toy_train(toy_args);
        if (*report) return cmd_report(report_args);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
