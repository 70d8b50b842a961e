#ifndef OODKIT_CONTRASTIVE_HPP
#define OODKIT_CONTRASTIVE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "oodkit/embedding.hpp"

namespace oodkit {

inline constexpr double kDefaultTemperature = 0.5;

/// Plain row-major matrix used for losses and gradients.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// 2N views; rows 2i and 2i+1 are the two augmentations of sample i.
class ViewBatch {
public:
    /// Requires an even row count >= 4, tau > 0 and finite nonzero rows.
    ViewBatch(Matrix z, double tau = kDefaultTemperature);

    const Matrix& z() const { return z_; }
    double tau() const { return tau_; }
    std::size_t pairs() const { return z_.rows / 2; }

    static std::size_t partner(std::size_t i) { return i ^ 1U; }

private:
    Matrix z_;
    double tau_;
};

/// S[i][j] = cos(z_i, z_j). Throws DomainError on a zero row.
Matrix cosine_similarity_matrix(const Matrix& z);

/// Mean over the 2N anchors of the softmax cross-entropy picking the partner
/// view among all other rows, at temperature tau.
double nt_xent_loss(const ViewBatch& batch);

/// Analytic d(nt_xent_loss)/dz, same shape as z.
Matrix nt_xent_grad(const ViewBatch& batch);

/// Loss and gradient from one shared forward pass.
double nt_xent_loss_and_grad(const ViewBatch& batch, Matrix* grad);

/**
 * One-hidden-layer encoder z = W2 tanh(W1 x + b1) + b2. Stands in for the
 * image backbone at toy scale; there is no projection head.
 */
struct ToyEncoderParams {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t output_dim = 0;
    Matrix w1;                 // hidden x input
    std::vector<double> b1;    // hidden
    Matrix w2;                 // output x hidden
    std::vector<double> b2;    // output

    /// Scaled-normal initialization, deterministic in `seed`.
    static ToyEncoderParams init(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim,
                                 std::uint64_t seed);

    std::vector<double> encode(std::span<const double> x) const;
    EmbeddingMatrix encode(const EmbeddingMatrix& x) const;

    friend bool operator==(const ToyEncoderParams&, const ToyEncoderParams&) = default;
};

struct ToyTrainingConfig {
    double noise_scale = 0.1;   // std-dev of the additive view noise
    double learning_rate = 0.05;
    std::size_t epochs = 20;
    std::size_t batch_n = 32;   // samples per batch; 2 * batch_n views
    double tau = kDefaultTemperature;
    std::uint64_t seed = 2019;
};

struct ToyTrainingResult {
    ToyEncoderParams params;
    std::vector<double> epoch_loss;  // mean batch loss per epoch
};

/**
 * Mini-batch gradient descent on the NT-Xent loss, back-propagated through
 * the encoder. Throws TrainingError when the loss stops being finite.
 */
ToyTrainingResult train_toy_encoder(const EmbeddingMatrix& data, const ToyEncoderParams& init,
                                    const ToyTrainingConfig& config);

void write_training_curve(const std::vector<double>& epoch_loss, const std::filesystem::path& path);

/// "TOYE" versioned container.
void save_toy_encoder(const ToyEncoderParams& params, const std::filesystem::path& path);
ToyEncoderParams load_toy_encoder(const std::filesystem::path& path);

}  // namespace oodkit

#endif  // OODKIT_CONTRASTIVE_HPP
