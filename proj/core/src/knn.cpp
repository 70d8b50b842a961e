#include "oodkit/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "oodkit/errors.hpp"
#include "oodkit/parallel.hpp"

namespace oodkit {

namespace {

constexpr std::size_t kQueryTile = 16;

std::vector<double> inverse_norms(std::span<const double> data, std::size_t rows, std::size_t d, Metric metric,
                                  const char* what) {
    std::vector<double> inv(rows, 0.0);
    if (metric != Metric::cosine) return inv;
    for (std::size_t i = 0; i < rows; ++i) {
        const double sq = dot(data.subspan(i * d, d), data.subspan(i * d, d));
        if (sq == 0.0) {
            throw DomainError(std::string("cosine distance is undefined for zero ") + what + " row " +
                              std::to_string(i));
        }
        inv[i] = 1.0 / std::sqrt(sq);
    }
    return inv;
}

struct KnnJob {
    std::span<const double> queries;
    std::vector<double> query_inv;
    const EmbeddingMatrix* train;
    std::vector<double> train_inv;
    std::size_t k;
    Metric metric;
    bool exclude_self;
};

// Fills rows [begin, end) of `out`.
void knn_range(const KnnJob& job, std::size_t begin, std::size_t end, NeighborTable& out) {
    const auto& train = *job.train;
    const std::size_t n = train.rows();
    const std::size_t d = train.cols();
    std::vector<double> dist(kQueryTile * n);
    std::vector<std::uint32_t> candidates;
    candidates.reserve(n);

    for (std::size_t tile = begin; tile < end; tile += kQueryTile) {
        const std::size_t count = std::min(kQueryTile, end - tile);
        for (std::size_t j = 0; j < n; ++j) {
            auto ref = train.row(j);
            for (std::size_t t = 0; t < count; ++t) {
                auto q = job.queries.subspan((tile + t) * d, d);
                dist[t * n + j] = job.metric == Metric::cosine
                                      ? cosine_distance_scaled(q, job.query_inv[tile + t], ref, job.train_inv[j])
                                      : euclidean_distance(q, ref);
            }
        }
        for (std::size_t t = 0; t < count; ++t) {
            const std::size_t qi = tile + t;
            const double* row = dist.data() + t * n;
            candidates.clear();
            for (std::uint32_t j = 0; j < n; ++j) {
                if (!(job.exclude_self && j == qi)) candidates.push_back(j);
            }
            auto closer = [row](std::uint32_t a, std::uint32_t b) {
                return row[a] < row[b] || (row[a] == row[b] && a < b);
            };
            std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(job.k),
                              candidates.end(), closer);
            for (std::size_t c = 0; c < job.k; ++c) {
                out.indices[qi * job.k + c] = candidates[c];
                out.distances[qi * job.k + c] = row[candidates[c]];
            }
        }
    }
}

NeighborTable run(const KnnJob& job, std::size_t rows, std::size_t workers) {
    NeighborTable out;
    out.rows = rows;
    out.k = job.k;
    out.indices.resize(rows * job.k);
    out.distances.resize(rows * job.k);
    parallel_for(rows, workers, [&](std::size_t b, std::size_t e) { knn_range(job, b, e, out); });
    return out;
}

}  // namespace

NeighborTable knn_table(std::span<const double> queries, std::size_t rows, const EmbeddingMatrix& train,
                        std::size_t k, Metric metric, std::size_t workers) {
    if (k == 0) throw ParameterError("k must be at least 1");
    if (k > train.rows()) {
        throw ParameterError("k = " + std::to_string(k) + " exceeds the " + std::to_string(train.rows()) +
                             " reference points");
    }
    if (queries.size() != rows * train.cols()) {
        throw ParameterError("query dimension does not match reference dimension " + std::to_string(train.cols()));
    }
    if (train.rows() > std::numeric_limits<std::uint32_t>::max()) throw ParameterError("reference set too large");
    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (!std::isfinite(queries[i])) throw DataError("non-finite query value", i / train.cols());
    }
    KnnJob job{queries,
               inverse_norms(queries, rows, train.cols(), metric, "query"),
               &train,
               inverse_norms(train.data(), train.rows(), train.cols(), metric, "reference"),
               k,
               metric,
               false};
    return run(job, rows, workers);
}

NeighborTable knn_table(const EmbeddingMatrix& queries, const EmbeddingMatrix& train, std::size_t k, Metric metric,
                        std::size_t workers) {
    if (queries.cols() != train.cols()) {
        throw ParameterError("query dimension " + std::to_string(queries.cols()) + " does not match reference dimension " +
                             std::to_string(train.cols()));
    }
    return knn_table(queries.data(), queries.rows(), train, k, metric, workers);
}

NeighborTable knn_self_table(const EmbeddingMatrix& train, std::size_t k, Metric metric, std::size_t workers) {
    if (k == 0) throw ParameterError("k must be at least 1");
    if (k >= train.rows()) {
        throw ParameterError("k = " + std::to_string(k) + " must be smaller than the " + std::to_string(train.rows()) +
                             " training points");
    }
    if (train.rows() > std::numeric_limits<std::uint32_t>::max()) throw ParameterError("reference set too large");
    auto inv = inverse_norms(train.data(), train.rows(), train.cols(), metric, "training");
    KnnJob job{train.data(), inv, &train, inv, k, metric, true};
    return run(job, train.rows(), workers);
}

NeighborList knn_query(std::span<const double> query, const EmbeddingMatrix& train, std::size_t k, Metric metric) {
    if (query.size() != train.cols()) {
        throw ParameterError("query dimension " + std::to_string(query.size()) + " does not match reference dimension " +
                             std::to_string(train.cols()));
    }
    auto table = knn_table(query, 1, train, k, metric, 1);
    return {std::move(table.indices), std::move(table.distances)};
}

}  // namespace oodkit
