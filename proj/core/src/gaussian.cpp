#include "oodkit/gaussian.hpp"

#include <cmath>
#include <string>

#include "binary_io.hpp"
#include "oodkit/errors.hpp"
#include "oodkit/parallel.hpp"

namespace oodkit {

namespace {

constexpr char kMagic[] = "SSDM";
constexpr std::uint8_t kVersion = 1;

}  // namespace

GaussianStats::GaussianStats(Eigen::VectorXd mu, Eigen::MatrixXd sigma, double epsilon)
    : mu_(std::move(mu)), sigma_(std::move(sigma)), epsilon_(epsilon) {
    const auto d = mu_.size();
    if (d == 0) throw ParameterError("Gaussian statistics need at least one dimension");
    if (sigma_.rows() != d || sigma_.cols() != d) throw ParameterError("covariance shape does not match the mean");
    if (!(epsilon_ >= 0.0) || !std::isfinite(epsilon_)) throw ParameterError("epsilon must be finite and >= 0");
    if (!mu_.allFinite() || !sigma_.allFinite()) throw DataError("non-finite mean or covariance");
    if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-9) throw ParameterError("covariance is not symmetric");

    Eigen::MatrixXd regularized = sigma_;
    regularized.diagonal().array() += epsilon_;
    llt_.compute(regularized);
    if (llt_.info() != Eigen::Success) {
        throw NumericalError("covariance + epsilon*I is not positive definite (epsilon = " + std::to_string(epsilon_) +
                             "); increase epsilon");
    }
    // LLT only checks pivots > 0; reject factors too small to divide by
    const Eigen::VectorXd diag = llt_.matrixLLT().diagonal();
    if (!(diag.minCoeff() > 0.0) || !diag.allFinite()) {
        throw NumericalError("covariance factorization is singular; increase epsilon");
    }
}

double GaussianStats::score(std::span<const double> x) const {
    if (x.size() != dim()) {
        throw ParameterError("query dimension " + std::to_string(x.size()) + " does not match model dimension " +
                             std::to_string(dim()));
    }
    Eigen::VectorXd centered = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())) - mu_;
    llt_.matrixL().solveInPlace(centered);
    return centered.norm();
}

double default_epsilon(const Eigen::MatrixXd& sigma) {
    return 1e-3 * sigma.trace() / static_cast<double>(sigma.rows());
}

GaussianStats fit_gaussian(const EmbeddingMatrix& train, std::optional<double> epsilon) {
    const std::size_t n = train.rows();
    const std::size_t d = train.cols();
    if (n < 2) throw ParameterError("Gaussian fit needs at least two samples, got " + std::to_string(n));
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
        train.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Eigen::VectorXd mu = x.colwise().mean().transpose();
    Eigen::MatrixXd centered = x.rowwise() - mu.transpose();
    Eigen::MatrixXd sigma = (centered.transpose() * centered) / static_cast<double>(n - 1);
    // the product is symmetric up to rounding; make it exact
    sigma = (0.5 * (sigma + sigma.transpose())).eval();
    double eps = epsilon ? *epsilon : default_epsilon(sigma);
    return GaussianStats(std::move(mu), std::move(sigma), eps);
}

double mahalanobis_score(std::span<const double> query, const GaussianStats& stats) { return stats.score(query); }

std::vector<double> mahalanobis_score_batch(std::span<const double> queries, const GaussianStats& stats,
                                            std::size_t workers) {
    const std::size_t d = stats.dim();
    if (queries.size() % d != 0) throw ParameterError("query batch is not a whole number of rows");
    std::vector<double> out(queries.size() / d);
    parallel_for(out.size(), workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) out[i] = stats.score(queries.subspan(i * d, d));
    });
    return out;
}

std::vector<double> mahalanobis_score_batch(const EmbeddingMatrix& queries, const GaussianStats& stats,
                                            std::size_t workers) {
    if (queries.cols() != stats.dim()) {
        throw ParameterError("query dimension " + std::to_string(queries.cols()) + " does not match model dimension " +
                             std::to_string(stats.dim()));
    }
    return mahalanobis_score_batch(queries.data(), stats, workers);
}

void save_gaussian(const GaussianStats& stats, const FitMetadata& meta, const std::filesystem::path& path) {
    const auto d = stats.dim();
    detail::BinaryWriter out(path);
    out.magic({kMagic, 4});
    out.put<std::uint8_t>(kVersion);
    out.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    out.put<double>(stats.epsilon());
    out.put_span<double>({stats.mu().data(), d});
    // symmetric, so storage order is irrelevant
    out.put_span<double>({stats.sigma().data(), d * d});
    out.put_strings(meta.fit_ids);
    out.put<std::uint8_t>(meta.normalized ? 1 : 0);
    out.finish();
}

GaussianStats load_gaussian(const std::filesystem::path& path, FitMetadata* meta) {
    detail::BinaryReader in(path);
    in.expect_magic({kMagic, 4});
    auto version = in.get<std::uint8_t>();
    if (version != kVersion) throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
    std::size_t d = in.get<std::uint32_t>();
    if (d == 0) throw FormatError(path.string() + ": zero dimension");
    double eps = in.get<double>();
    auto mu = in.get_vector<double>(d);
    auto sigma = in.get_vector<double>(d * d);
    FitMetadata m;
    m.fit_ids = in.get_strings();
    m.normalized = in.get<std::uint8_t>() != 0;
    in.expect_end();
    if (meta) *meta = std::move(m);
    return GaussianStats(Eigen::Map<Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(d)),
                         Eigen::Map<Eigen::MatrixXd>(sigma.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)),
                         eps);
}

}  // namespace oodkit
