#ifndef OODKIT_KNN_HPP
#define OODKIT_KNN_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "oodkit/distance.hpp"
#include "oodkit/embedding.hpp"

namespace oodkit {

/// K nearest reference points, ordered by (distance, index).
struct NeighborList {
    std::vector<std::uint32_t> indices;
    std::vector<double> distances;

    std::size_t size() const { return indices.size(); }
    friend bool operator==(const NeighborList&, const NeighborList&) = default;
};

/**
 * Row-major table of the `k` nearest reference points for each of `rows`
 * queries. Entries of a row are sorted by (distance, index), so the first
 * j entries of a row are exactly the j-nearest list for any j <= k.
 */
struct NeighborTable {
    std::size_t rows = 0;
    std::size_t k = 0;
    std::vector<std::uint32_t> indices;
    std::vector<double> distances;

    std::span<const std::uint32_t> row_indices(std::size_t i) const { return {indices.data() + i * k, k}; }
    std::span<const double> row_distances(std::size_t i) const { return {distances.data() + i * k, k}; }

    friend bool operator==(const NeighborTable&, const NeighborTable&) = default;
};

/// Exact k nearest points of `train` to `query`; ties go to the lower index.
NeighborList knn_query(std::span<const double> query, const EmbeddingMatrix& train, std::size_t k,
                       Metric metric);

/**
 * Neighbor table of every row of `queries` against `train`. Distances are
 * computed in query tiles so each reference row is streamed once per tile.
 */
NeighborTable knn_table(const EmbeddingMatrix& queries, const EmbeddingMatrix& train, std::size_t k,
                        Metric metric, std::size_t workers);

/// Row-major `rows` x train.cols() queries; `rows` may be zero.
NeighborTable knn_table(std::span<const double> queries, std::size_t rows, const EmbeddingMatrix& train,
                        std::size_t k, Metric metric, std::size_t workers);

/// Same as knn_table(train, train, ...) except row i never lists i.
NeighborTable knn_self_table(const EmbeddingMatrix& train, std::size_t k, Metric metric,
                             std::size_t workers);

}  // namespace oodkit

#endif  // OODKIT_KNN_HPP
