// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include "cli_runner.hpp"
#include "fixture.hpp"
#include "oodkit/contrastive.hpp"
#include "oodkit/eval.hpp"
#include "oodkit/gaussian.hpp"
#include "oodkit/lof.hpp"
#include "oodkit/protocols.hpp"
#include "oodkit/split.hpp"
#include "oodkit/synthetic.hpp"
#include "oracles.hpp"
#include "random_manifest.hpp"

using namespace oodkit;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const std::string& criterion, const std::string& detail) {
    std::printf("%s  %-34s %s\n", ok ? "PASS" : "FAIL", criterion.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

EmbeddingMatrix to_matrix(const oracle::Rows& rows) {
    return EmbeddingMatrix(rows.size(), rows[0].size(), oracle::flatten(rows));
}

void lof_oracle_equivalence() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2019);
    const std::size_t ks[] = {1, 5, 10, 50};
    double worst = 0;
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t k = ks[inst % 4];
        const bool cos = (inst / 4) % 2 == 0;
        const std::size_t n = std::uniform_int_distribution<std::size_t>(k + 2, 500)(rng);
        const std::size_t d = std::uniform_int_distribution<std::size_t>(1 + (cos ? 1 : 0), 16)(rng);
        auto train = oracle::random_rows(n, d, rng);
        auto queries = oracle::random_rows(20, d, rng, -1.5, 1.5);
        auto model = fit_lof(to_matrix(train), k, cos ? Metric::cosine : Metric::euclidean);
        auto ref = oracle::fit_lof(train, k, cos);
        auto got = lof_score_batch(to_matrix(queries), model);
        for (std::size_t q = 0; q < queries.size(); ++q) {
            worst = std::max(worst, oracle::rel_err(got[q], oracle::lof_score(ref, train, queries[q], k, cos)));
        }
    }
    const double secs = seconds_since(t0);
    report(worst <= 1e-9 && secs < 30.0, "LOF oracle equivalence",
           "50 instances, max rel err " + fmt("%.2e", worst) + ", " + fmt("%.2f", secs) + " s");
}

void lof_hand_cases() {
    auto model = fit_lof(EmbeddingMatrix(4, 2, {0, 0, 1, 0, 0, 1, 1, 1}), 3, Metric::euclidean);
    const double center = lof_score(std::vector<double>{0.5, 0.5}, model);
    const double far = lof_score(std::vector<double>{10, 10}, model);
    report(std::abs(center - 1.0) <= 1e-9 && std::abs(far - 9.34) <= 0.01, "LOF hand cases",
           "center " + fmt("%.12f", center) + ", (10,10) " + fmt("%.4f", far));
}

void mahalanobis() {
    std::mt19937_64 rng(7);
    double identity_err = 0;
    GaussianStats iso(Eigen::VectorXd::Zero(5), Eigen::MatrixXd::Identity(5, 5), 0.0);
    for (int t = 0; t < 1000; ++t) {
        auto x = oracle::random_rows(1, 5, rng, -10, 10)[0];
        identity_err = std::max(identity_err, std::abs(mahalanobis_score(x, iso) - oracle::euclid(x, oracle::Vec(5, 0.0))));
    }
    double inverse_err = 0;
    bool zero_at_mu = true;
    for (int t = 0; t < 50; ++t) {
        const std::size_t d = 1 + t % 6;
        auto rows = oracle::random_rows(3 * d + 5, d, rng);
        auto stats = fit_gaussian(to_matrix(rows), 0.0);
        oracle::Rows sigma(d, oracle::Vec(d));
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) sigma[a][b] = stats.sigma()(a, b);
        auto inv = oracle::invert(sigma);
        oracle::Vec mu(stats.mu().data(), stats.mu().data() + d);
        for (int q = 0; q < 10; ++q) {
            auto x = oracle::random_rows(1, d, rng, -2, 2)[0];
            oracle::Vec diff(d);
            for (std::size_t i = 0; i < d; ++i) diff[i] = x[i] - mu[i];
            inverse_err = std::max(inverse_err, oracle::rel_err(mahalanobis_score(x, stats), std::sqrt(oracle::quad_form(inv, diff))));
        }
        zero_at_mu = zero_at_mu && mahalanobis_score(mu, stats) == 0.0;
    }
    report(identity_err <= 1e-12 && inverse_err <= 1e-9 && zero_at_mu, "Mahalanobis",
           "identity err " + fmt("%.1e", identity_err) + ", inverse rel err " + fmt("%.1e", inverse_err) +
               ", score(mu) == 0: " + (zero_at_mu ? "yes" : "no"));
}

void nt_xent() {
    double ln3_err = 0;
    for (double tau : {0.1, 0.5, 1.0}) {
        ViewBatch b(Matrix(4, 2, {0.3, -2, 0.3, -2, 0.3, -2, 0.3, -2}), tau);
        ln3_err = std::max(ln3_err, std::abs(nt_xent_loss(b) - std::log(3.0)));
    }
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    const std::size_t ns[] = {2, 4, 8};
    const std::size_t ds[] = {3, 8};
    const double taus[] = {0.1, 0.5, 1.0};
    double grad_err = 0, ortho = 0;
    for (int t = 0; t < 50; ++t) {
        Matrix z(2 * ns[t % 3], ds[(t / 3) % 2]);
        for (auto& v : z.data) v = g(rng);
        const double tau = taus[(t / 6) % 3];
        auto analytic = nt_xent_grad(ViewBatch(z, tau));
        auto numeric = oracle::central_difference(
            [&](const std::vector<double>& x) { return nt_xent_loss(ViewBatch(Matrix(z.rows, z.cols, x), tau)); },
            z.data, 1e-4);
        for (std::size_t i = 0; i < numeric.size(); ++i) {
            const double denom = std::max(std::abs(analytic.data[i]), std::abs(numeric[i]));
            if (denom > 0) grad_err = std::max(grad_err, std::abs(analytic.data[i] - numeric[i]) / denom);
        }
        for (std::size_t r = 0; r < z.rows; ++r) {
            double dot = 0;
            for (std::size_t c = 0; c < z.cols; ++c) dot += z(r, c) * analytic(r, c);
            ortho = std::max(ortho, std::abs(dot));
        }
    }
    report(ln3_err <= 1e-12 && grad_err < 1e-5 && ortho <= 1e-10, "NT-Xent",
           "ln3 err " + fmt("%.1e", ln3_err) + ", grad rel err " + fmt("%.2e", grad_err) + ", max |z.grad| " +
               fmt("%.1e", ortho));
}

void auroc_exactness() {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<std::size_t> size(1, 200);
    bool exact = true, swap = true, monotone = true;
    for (int t = 0; t < 500; ++t) {
        const int levels = 2 + t % 50;
        std::uniform_int_distribution<int> pick(0, levels - 1);
        std::vector<double> id(size(rng)), ood(size(rng));
        for (auto& v : id) v = pick(rng) / 8.0;
        for (auto& v : ood) v = pick(rng) / 8.0 + 0.25;
        if (t == 0) id.assign(200, 0.5), ood.assign(200, 0.5);
        const double a = auroc({id, ood});
        exact = exact && auroc_counts({id, ood}).twice_wins == oracle::twice_pairwise_wins(id, ood) &&
                a == oracle::pairwise_auroc(id, ood);
        swap = swap && a + auroc({ood, id}) == 1.0;
        auto f = [](std::vector<double> v) {
            for (auto& x : v) x = std::exp(2.0 * x) - 3.0;
            return v;
        };
        monotone = monotone && auroc({f(id), f(ood)}) == a;
    }
    report(exact && swap && monotone, "AUROC",
           std::string("oracle exact: ") + (exact ? "yes" : "no") + ", swap exact: " + (swap ? "yes" : "no") +
               ", monotone invariant: " + (monotone ? "yes" : "no"));
}

void end_to_end() {
    const auto t0 = Clock::now();
    // the encoder sees samples from both clusters; detectors see only the ID cluster
    const std::uint64_t seed = 2019;
    auto train = two_cluster_data(512, seed);
    auto test = two_cluster_data(400, seed + 1);
    auto params = train_toy_encoder(train, ToyEncoderParams::init(2, 32, 8, seed), ToyTrainingConfig{}).params;
    std::vector<std::size_t> fit_rows, id_rows, ood_rows;
    for (std::size_t i = 0; i < train.rows(); i += 2) fit_rows.push_back(i);
    for (std::size_t i = 0; i < test.rows(); ++i) (i % 2 ? ood_rows : id_rows).push_back(i);
    auto z_fit = params.encode(train.select(fit_rows));
    auto z_id = params.encode(test.select(id_rows));
    auto z_ood = params.encode(test.select(ood_rows));
    auto lof = fit_lof(z_fit, 10, Metric::cosine);
    const double a_lof = auroc({lof_score_batch(z_id, lof), lof_score_batch(z_ood, lof)});
    auto stats = fit_gaussian(z_fit);
    const double a_ssd = auroc({mahalanobis_score_batch(z_id, stats), mahalanobis_score_batch(z_ood, stats)});
    const double secs = seconds_since(t0);
    report(a_lof >= 0.95 && secs < 60.0, "End-to-end pipeline (LOF)",
           "AUROC " + fmt("%.4f", a_lof) + ", " + fmt("%.2f", secs) + " s");
    report(a_ssd >= 0.95, "End-to-end pipeline (SSD)", "AUROC " + fmt("%.4f", a_ssd));
}

std::string first_column(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    std::getline(in, line);
    while (std::getline(in, line)) out += (out.empty() ? "" : "|") + line.substr(0, line.find(','));
    return out;
}

void protocol_fidelity() {
    TempDir dir;
    const auto& fx = synthetic_fixture();
    const std::string data = "--embeddings " + quoted(fixture_dir() / "synthetic.oode") + " --manifest " +
                             quoted(fixture_dir() / "synthetic_manifest.csv");
    int ran = 0, total = 0;
    bool labels_ok = true;
    double sweep_gap = 0;
    for (const auto& name : protocol_names()) {
        ++total;
        const bool table2 = name.rfind("ham-vs-bcn", 0) == 0;
        auto r = run_cli("sweep " + data + " --protocol " + name + (table2 ? "" : " --ssd") + " --out-dir " +
                             quoted(dir / name),
                         dir.path());
        if (r.status != 0) {
            std::printf("      %s: exit %d\n%s", name.c_str(), r.status, r.output.c_str());
            continue;
        }
        ++ran;
        const std::string rows = first_column(read_text(dir / name / (name + "_table.csv")));
        const std::string want = table2 ? "K = 40|K = 50|K = 60|K = 70|K = 100|K = 200|K = 250|K = 300"
                                        : "K = 10|K = 50|K = 100|K = 200|K = 300|SSD";
        if (rows != want) {
            labels_ok = false;
            std::printf("      %s rows: %s\n", name.c_str(), rows.c_str());
        }
        // each sweep entry against a separate fit + eval
        for (auto k : protocol_default_ks(name)) {
            auto swept = report_from_json(read_text(dir / name / (name + "_K" + std::to_string(k) + ".json")));
            DetectorSpec d;
            d.k = k;
            auto single = run_experiment(protocol_config(name, d), fx.manifest, fx.embeddings);
            sweep_gap = std::max(sweep_gap, std::abs(swept.auroc - single.auroc));
        }
    }
    // CLI fit + eval for the ham column, compared with its sweep output
    const std::string fit_ids = " --classes AK,BCC,BKL,MEL,NV,SCC --sources HAM";
    for (std::size_t k : {10u, 50u, 100u, 200u, 300u}) {
        auto f = run_cli("fit " + data + fit_ids + " --k " + std::to_string(k) + " --out " + quoted(dir / "m"), dir.path());
        auto e = run_cli("eval --model " + quoted(dir / "m") + " " + data +
                             " --id-classes AK,BCC,BKL,MEL,NV,SCC --id-sources HAM --ood-classes DF,VASC --ood-sources HAM"
                             " --out " + quoted(dir / "r.json"),
                         dir.path());
        if (f.status != 0 || e.status != 0) {
            sweep_gap = INFINITY;
            continue;
        }
        auto swept = report_from_json(read_text(dir / "ham" / ("ham_K" + std::to_string(k) + ".json")));
        sweep_gap = std::max(sweep_gap, std::abs(report_from_json(read_text(dir / "r.json")).auroc - swept.auroc));
    }
    report(ran == total && labels_ok && sweep_gap <= 1e-12, "Protocol fidelity",
           std::to_string(ran) + "/" + std::to_string(total) + " protocol invocations ran, row labels " +
               (labels_ok ? "match" : "differ") + ", sweep vs single max gap " + fmt("%.1e", sweep_gap));
}

void split_contract() {
    std::mt19937_64 rng(2019);
    int violations = 0;
    bool identical = true;
    for (int t = 0; t < 1000; ++t) {
        auto m = random_manifest(rng);
        auto a = stratified_group_split(m, {}, static_cast<std::uint64_t>(t));
        if (!check_split_contract(m, a).empty()) ++violations;
        if (t % 10 == 0) {
            std::ostringstream x, y;
            write_manifest(a.apply(m), x);
            write_manifest(stratified_group_split(m, {}, static_cast<std::uint64_t>(t)).apply(m), y);
            identical = identical && x.str() == y.str();
        }
    }
    report(violations == 0 && identical, "Split contract",
           "1000 manifests, " + std::to_string(violations) + " violations, same seed byte-identical: " +
               (identical ? "yes" : "no"));
}

void parallel_determinism() {
    std::mt19937_64 rng(17);
    auto train = to_matrix(oracle::random_rows(600, 12, rng));
    auto queries = to_matrix(oracle::random_rows(500, 12, rng));
    bool same = true;
    for (Metric metric : {Metric::cosine, Metric::euclidean}) {
        auto model = fit_lof(train, 10, metric, 1);
        auto base = lof_score_batch(queries, model, 1);
        for (std::size_t w : {2u, 8u}) {
            same = same && fit_lof(train, 10, metric, w) == model && lof_score_batch(queries, model, w) == base;
        }
    }
    auto stats = fit_gaussian(train);
    auto base = mahalanobis_score_batch(queries, stats, 1);
    for (std::size_t w : {2u, 8u}) same = same && mahalanobis_score_batch(queries, stats, w) == base;
    report(same, "Determinism under parallelism", std::string("1/2/8 workers bitwise identical: ") + (same ? "yes" : "no"));
}

template <typename F>
void guarded(const char* name, F&& f) {
    try {
        f();
    } catch (const std::exception& e) {
        report(false, name, std::string("threw: ") + e.what());
    }
}

}  // namespace

int main() {
    guarded("LOF oracle equivalence", lof_oracle_equivalence);
    guarded("LOF hand cases", lof_hand_cases);
    guarded("Mahalanobis", mahalanobis);
    guarded("NT-Xent", nt_xent);
    guarded("AUROC", auroc_exactness);
    guarded("End-to-end pipeline", end_to_end);
    guarded("Protocol fidelity", protocol_fidelity);
    guarded("Split contract", split_contract);
    guarded("Determinism under parallelism", parallel_determinism);
    std::printf("%s\n", failures == 0 ? "all acceptance criteria passed" : "some acceptance criteria FAILED");
    return failures == 0 ? 0 : 1;
}
