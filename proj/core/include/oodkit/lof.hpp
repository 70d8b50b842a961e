#ifndef OODKIT_LOF_HPP
#define OODKIT_LOF_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oodkit/distance.hpp"
#include "oodkit/embedding.hpp"
#include "oodkit/knn.hpp"
#include "oodkit/model_io.hpp"

namespace oodkit {

/// Lower bound applied to every reachability distance before averaging, so
/// duplicate training points keep a finite density.
inline constexpr double kMinReachDistance = 1e-12;

/// max(kdist(o), d(p, o)).
inline double reach_dist(double p_to_o_distance, double kdist_o) {
    return p_to_o_distance > kdist_o ? p_to_o_distance : kdist_o;
}

/**
 * Local Outlier Factor fitted in novelty mode.
 *
 * Training neighborhoods exclude the point itself; query neighborhoods are
 * taken over the whole training set. Immutable after construction, so a
 * single model may be scored from many threads.
 */
class LofModel {
public:
    /// Assembles a model from a self-excluded neighbor table of at least k
    /// columns (only the first k are used).
    LofModel(EmbeddingMatrix train, std::size_t k, Metric metric, const NeighborTable& self_table);

    /// Restores a persisted model; checks shapes and the stored invariants.
    LofModel(EmbeddingMatrix train, std::size_t k, Metric metric, std::vector<double> kdist,
             std::vector<double> lrd, NeighborTable neighbors);

    const EmbeddingMatrix& train() const { return train_; }
    std::size_t k() const { return k_; }
    Metric metric() const { return metric_; }
    std::span<const double> kdist() const { return kdist_; }
    std::span<const double> lrd() const { return lrd_; }
    const NeighborTable& neighbors() const { return neighbors_; }

    /// LOF of a query whose k nearest training points are given (sorted by
    /// distance). Only the first k() entries are read.
    double score_from_neighbors(std::span<const std::uint32_t> indices, std::span<const double> distances) const;

    friend bool operator==(const LofModel&, const LofModel&) = default;

private:
    EmbeddingMatrix train_;
    std::size_t k_;
    Metric metric_;
    std::vector<double> kdist_;
    std::vector<double> lrd_;
    NeighborTable neighbors_;
};

/// Throws DegenerateDataError when every row coincides under `metric`.
void require_nondegenerate(const EmbeddingMatrix& train, Metric metric);

/// Requires 1 <= k < train.rows(). Throws DegenerateDataError when every
/// training row is identical.
LofModel fit_lof(const EmbeddingMatrix& train, std::size_t k, Metric metric, std::size_t workers = 0);

/// Higher means more out-of-distribution; about 1 for inliers.
double lof_score(std::span<const double> query, const LofModel& model);

/// Element i equals lof_score(queries.row(i), model), bitwise, for any
/// worker count. `workers == 0` selects default_workers().
std::vector<double> lof_score_batch(const EmbeddingMatrix& queries, const LofModel& model,
                                    std::size_t workers = 0);

/// Row-major flat batch; an empty span gives an empty result.
std::vector<double> lof_score_batch(std::span<const double> queries, const LofModel& model,
                                    std::size_t workers = 0);

/// LOF of every query row against `model`, from a precomputed query
/// neighbor table with at least model.k() columns.
std::vector<double> lof_scores_from_table(const NeighborTable& query_neighbors, const LofModel& model,
                                          std::size_t workers = 0);

/// "LOFM" container, bit-exact on reload.
void save_lof(const LofModel& model, const FitMetadata& meta, const std::filesystem::path& path);
LofModel load_lof(const std::filesystem::path& path, FitMetadata* meta = nullptr);

}  // namespace oodkit

#endif  // OODKIT_LOF_HPP
