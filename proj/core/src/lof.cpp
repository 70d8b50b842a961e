#include "oodkit/lof.hpp"

#include <cmath>
#include <string>

#include "binary_io.hpp"
#include "oodkit/errors.hpp"
#include "oodkit/parallel.hpp"

namespace oodkit {

namespace {

constexpr char kMagic[] = "LOFM";
constexpr std::uint8_t kVersion = 1;

std::uint8_t metric_tag(Metric m) { return m == Metric::cosine ? 0 : 1; }

Metric metric_from_tag(std::uint8_t tag, const std::filesystem::path& path) {
    if (tag == 0) return Metric::cosine;
    if (tag == 1) return Metric::euclidean;
    throw FormatError(path.string() + ": unknown metric tag " + std::to_string(tag));
}

// Mean reachability distance of a point to its first k neighbors.
double mean_reach(std::span<const std::uint32_t> idx, std::span<const double> dist, std::span<const double> kdist,
                  std::size_t k) {
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        double r = reach_dist(dist[c], kdist[idx[c]]);
        sum += r < kMinReachDistance ? kMinReachDistance : r;
    }
    return sum / static_cast<double>(k);
}

}  // namespace

void require_nondegenerate(const EmbeddingMatrix& train, Metric metric) {
    auto first = train.row(0);
    for (std::size_t i = 1; i < train.rows(); ++i) {
        if (distance(metric, first, train.row(i)) != 0.0) return;
    }
    throw DegenerateDataError("all " + std::to_string(train.rows()) +
                              " training points coincide; local densities are undefined");
}

LofModel::LofModel(EmbeddingMatrix train, std::size_t k, Metric metric, const NeighborTable& self_table)
    : train_(std::move(train)), k_(k), metric_(metric) {
    const std::size_t n = train_.rows();
    if (k_ == 0 || k_ >= n) throw ParameterError("LOF needs 1 <= k < n (k = " + std::to_string(k_) + ", n = " + std::to_string(n) + ")");
    if (self_table.rows != n || self_table.k < k_) throw ParameterError("neighbor table does not cover the model");

    neighbors_.rows = n;
    neighbors_.k = k_;
    neighbors_.indices.resize(n * k_);
    neighbors_.distances.resize(n * k_);
    kdist_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto idx = self_table.row_indices(i);
        auto dist = self_table.row_distances(i);
        std::copy_n(idx.begin(), k_, neighbors_.indices.begin() + static_cast<std::ptrdiff_t>(i * k_));
        std::copy_n(dist.begin(), k_, neighbors_.distances.begin() + static_cast<std::ptrdiff_t>(i * k_));
        kdist_[i] = dist[k_ - 1];
    }
    lrd_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        lrd_[i] = 1.0 / mean_reach(neighbors_.row_indices(i), neighbors_.row_distances(i), kdist_, k_);
    }
}

LofModel::LofModel(EmbeddingMatrix train, std::size_t k, Metric metric, std::vector<double> kdist,
                   std::vector<double> lrd, NeighborTable neighbors)
    : train_(std::move(train)), k_(k), metric_(metric), kdist_(std::move(kdist)), lrd_(std::move(lrd)),
      neighbors_(std::move(neighbors)) {
    const std::size_t n = train_.rows();
    if (k_ == 0 || k_ >= n) throw FormatError("stored LOF model has k outside [1, n)");
    if (kdist_.size() != n || lrd_.size() != n || neighbors_.rows != n || neighbors_.k != k_ ||
        neighbors_.indices.size() != n * k_ || neighbors_.distances.size() != n * k_) {
        throw FormatError("stored LOF model has inconsistent array sizes");
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto idx = neighbors_.row_indices(i);
        auto dist = neighbors_.row_distances(i);
        for (std::size_t c = 0; c < k_; ++c) {
            if (idx[c] >= n || idx[c] == i) throw FormatError("stored LOF neighbor list is invalid at row " + std::to_string(i));
            if (c > 0 && dist[c] < dist[c - 1]) throw FormatError("stored LOF neighbor distances are unsorted at row " + std::to_string(i));
        }
        if (dist[k_ - 1] != kdist_[i]) throw FormatError("stored k-distance disagrees with neighbor list at row " + std::to_string(i));
        if (!(lrd_[i] > 0.0) || !std::isfinite(lrd_[i])) throw FormatError("stored density is not positive at row " + std::to_string(i));
    }
}

double LofModel::score_from_neighbors(std::span<const std::uint32_t> indices, std::span<const double> distances) const {
    double reach = mean_reach(indices, distances, kdist_, k_);
    double lrd_sum = 0.0;
    for (std::size_t c = 0; c < k_; ++c) lrd_sum += lrd_[indices[c]];
    double mean_neighbor_lrd = lrd_sum / static_cast<double>(k_);
    double query_lrd = 1.0 / reach;
    return mean_neighbor_lrd / query_lrd;
}

LofModel fit_lof(const EmbeddingMatrix& train, std::size_t k, Metric metric, std::size_t workers) {
    if (train.rows() < 2) throw ParameterError("LOF needs at least two training points");
    if (k == 0 || k >= train.rows()) {
        throw ParameterError("LOF needs 1 <= k < n (k = " + std::to_string(k) + ", n = " + std::to_string(train.rows()) + ")");
    }
    require_nondegenerate(train, metric);
    auto table = knn_self_table(train, k, metric, workers);
    return LofModel(train, k, metric, table);
}

double lof_score(std::span<const double> query, const LofModel& model) {
    auto nn = knn_query(query, model.train(), model.k(), model.metric());
    return model.score_from_neighbors(nn.indices, nn.distances);
}

std::vector<double> lof_scores_from_table(const NeighborTable& query_neighbors, const LofModel& model,
                                          std::size_t workers) {
    if (query_neighbors.k < model.k()) throw ParameterError("query neighbor table narrower than k");
    std::vector<double> out(query_neighbors.rows);
    parallel_for(out.size(), workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            out[i] = model.score_from_neighbors(query_neighbors.row_indices(i), query_neighbors.row_distances(i));
        }
    });
    return out;
}

std::vector<double> lof_score_batch(std::span<const double> queries, const LofModel& model, std::size_t workers) {
    const std::size_t d = model.train().cols();
    if (queries.size() % d != 0) throw ParameterError("query batch is not a whole number of rows");
    if (queries.empty()) return {};
    auto table = knn_table(queries, queries.size() / d, model.train(), model.k(), model.metric(), workers);
    return lof_scores_from_table(table, model, workers);
}

std::vector<double> lof_score_batch(const EmbeddingMatrix& queries, const LofModel& model, std::size_t workers) {
    if (queries.cols() != model.train().cols()) {
        throw ParameterError("query dimension " + std::to_string(queries.cols()) + " does not match model dimension " +
                             std::to_string(model.train().cols()));
    }
    return lof_score_batch(queries.data(), model, workers);
}

void save_lof(const LofModel& model, const FitMetadata& meta, const std::filesystem::path& path) {
    const auto& train = model.train();
    detail::BinaryWriter out(path);
    out.magic({kMagic, 4});
    out.put<std::uint8_t>(kVersion);
    out.put<std::uint8_t>(metric_tag(model.metric()));
    out.put<std::uint32_t>(static_cast<std::uint32_t>(model.k()));
    out.put<std::uint32_t>(static_cast<std::uint32_t>(train.rows()));
    out.put<std::uint32_t>(static_cast<std::uint32_t>(train.cols()));
    out.put_span<double>(train.data());
    out.put_span<double>(model.kdist());
    out.put_span<double>(model.lrd());
    out.put_span<std::uint32_t>(model.neighbors().indices);
    out.put_span<double>(model.neighbors().distances);
    out.put_strings(meta.fit_ids);
    out.put<std::uint8_t>(meta.normalized ? 1 : 0);
    out.finish();
}

LofModel load_lof(const std::filesystem::path& path, FitMetadata* meta) {
    detail::BinaryReader in(path);
    in.expect_magic({kMagic, 4});
    auto version = in.get<std::uint8_t>();
    if (version != kVersion) throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
    auto metric = metric_from_tag(in.get<std::uint8_t>(), path);
    std::size_t k = in.get<std::uint32_t>();
    std::size_t n = in.get<std::uint32_t>();
    std::size_t d = in.get<std::uint32_t>();
    if (n < 2 || d == 0 || k == 0 || k >= n) throw FormatError(path.string() + ": implausible header");
    auto train = in.get_vector<double>(n * d);
    auto kdist = in.get_vector<double>(n);
    auto lrd = in.get_vector<double>(n);
    NeighborTable nb;
    nb.rows = n;
    nb.k = k;
    nb.indices = in.get_vector<std::uint32_t>(n * k);
    nb.distances = in.get_vector<double>(n * k);
    FitMetadata m;
    m.fit_ids = in.get_strings();
    m.normalized = in.get<std::uint8_t>() != 0;
    in.expect_end();
    const bool normalized = m.normalized;
    if (meta) *meta = std::move(m);
    try {
        return LofModel(EmbeddingMatrix(n, d, std::move(train), normalized), k, metric, std::move(kdist), std::move(lrd), std::move(nb));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace oodkit
