#ifndef OODKIT_GAUSSIAN_HPP
#define OODKIT_GAUSSIAN_HPP

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "oodkit/embedding.hpp"
#include "oodkit/model_io.hpp"

namespace oodkit {

/**
 * Mean and regularized covariance of the in-distribution training features,
 * with the Cholesky factor of (sigma + epsilon * I) kept for solves.
 */
class GaussianStats {
public:
    /// Builds stats from explicit moments. Throws NumericalError if
    /// sigma + epsilon * I is not positive definite.
    GaussianStats(Eigen::VectorXd mu, Eigen::MatrixXd sigma, double epsilon);

    std::size_t dim() const { return static_cast<std::size_t>(mu_.size()); }
    const Eigen::VectorXd& mu() const { return mu_; }
    const Eigen::MatrixXd& sigma() const { return sigma_; }
    double epsilon() const { return epsilon_; }
    /// Lower-triangular L with L * L^T = sigma + epsilon * I.
    Eigen::MatrixXd factor() const { return llt_.matrixL(); }

    /// sqrt((x - mu)^T (sigma + epsilon I)^-1 (x - mu)) via one triangular solve.
    double score(std::span<const double> x) const;

private:
    Eigen::VectorXd mu_;
    Eigen::MatrixXd sigma_;
    double epsilon_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// 1e-3 * trace(sigma) / d.
double default_epsilon(const Eigen::MatrixXd& sigma);

/// Column means and unbiased (n - 1) covariance. A missing epsilon selects
/// default_epsilon(). Requires at least two rows.
GaussianStats fit_gaussian(const EmbeddingMatrix& train, std::optional<double> epsilon = std::nullopt);

double mahalanobis_score(std::span<const double> query, const GaussianStats& stats);

std::vector<double> mahalanobis_score_batch(const EmbeddingMatrix& queries, const GaussianStats& stats,
                                            std::size_t workers = 0);

std::vector<double> mahalanobis_score_batch(std::span<const double> queries, const GaussianStats& stats,
                                            std::size_t workers = 0);

/// "SSDM" container.
void save_gaussian(const GaussianStats& stats, const FitMetadata& meta, const std::filesystem::path& path);
GaussianStats load_gaussian(const std::filesystem::path& path, FitMetadata* meta = nullptr);

}  // namespace oodkit

#endif  // OODKIT_GAUSSIAN_HPP
