#include "oodkit/contrastive.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "binary_io.hpp"
#include "oodkit/distance.hpp"
#include "oodkit/errors.hpp"
#include "rng.hpp"

namespace oodkit {

namespace {

constexpr char kMagic[] = "TOYE";
constexpr std::uint8_t kVersion = 1;

struct NormalizedRows {
    Matrix unit;                // z_i / |z_i|
    std::vector<double> norms;  // |z_i|
};

NormalizedRows normalize_rows(const Matrix& z) {
    NormalizedRows out{Matrix(z.rows, z.cols), std::vector<double>(z.rows)};
    for (std::size_t i = 0; i < z.rows; ++i) {
        std::span<const double> row(z.data.data() + i * z.cols, z.cols);
        double norm = l2_norm(row);
        if (norm == 0.0) throw DomainError("zero embedding row " + std::to_string(i));
        out.norms[i] = norm;
        for (std::size_t j = 0; j < z.cols; ++j) out.unit(i, j) = row[j] / norm;
    }
    return out;
}

Matrix gram(const Matrix& unit) {
    const std::size_t m = unit.rows;
    Matrix s(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        s(i, i) = 1.0;
        for (std::size_t j = i + 1; j < m; ++j) {
            double v = 0.0;
            for (std::size_t c = 0; c < unit.cols; ++c) v += unit(i, c) * unit(j, c);
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    return s;
}

}  // namespace

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != rows * cols) throw ParameterError("matrix data does not match its shape");
}

ViewBatch::ViewBatch(Matrix z, double tau) : z_(std::move(z)), tau_(tau) {
    if (z_.rows < 4 || z_.rows % 2 != 0) {
        throw ParameterError("a view batch needs an even number of rows, at least 4 (got " + std::to_string(z_.rows) + ")");
    }
    if (z_.cols == 0) throw ParameterError("a view batch needs at least one column");
    if (!(tau_ > 0.0) || !std::isfinite(tau_)) throw ParameterError("temperature must be positive");
    for (std::size_t i = 0; i < z_.rows; ++i) {
        bool zero = true;
        for (std::size_t j = 0; j < z_.cols; ++j) {
            double v = z_(i, j);
            if (!std::isfinite(v)) throw DataError("non-finite view", i);
            zero = zero && v == 0.0;
        }
        if (zero) throw DomainError("zero view row " + std::to_string(i));
    }
}

Matrix cosine_similarity_matrix(const Matrix& z) { return gram(normalize_rows(z).unit); }

double nt_xent_loss_and_grad(const ViewBatch& batch, Matrix* grad) {
    const Matrix& z = batch.z();
    const std::size_t m = z.rows;
    const double tau = batch.tau();
    auto [unit, norms] = normalize_rows(z);
    Matrix s = gram(unit);

    // coef(i, k) = dL/dS_ik seen from anchor i
    Matrix coef(m, m);
    const double scale = 1.0 / (static_cast<double>(m) * tau);
    double total = 0.0;
    std::vector<double> logits(m);
    for (std::size_t i = 0; i < m; ++i) {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < m; ++k) {
            if (k == i) continue;
            logits[k] = s(i, k) / tau;
            peak = std::max(peak, logits[k]);
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            if (k != i) sum += std::exp(logits[k] - peak);
        }
        const double lse = peak + std::log(sum);
        const std::size_t p = ViewBatch::partner(i);
        total += lse - logits[p];
        if (grad) {
            for (std::size_t k = 0; k < m; ++k) {
                if (k == i) continue;
                coef(i, k) = scale * (std::exp(logits[k] - lse) - (k == p ? 1.0 : 0.0));
            }
        }
    }

    if (grad) {
        *grad = Matrix(m, z.cols);
        std::vector<double> g(z.cols);
        for (std::size_t i = 0; i < m; ++i) {
            std::fill(g.begin(), g.end(), 0.0);
            for (std::size_t k = 0; k < m; ++k) {
                if (k == i) continue;
                const double w = coef(i, k) + coef(k, i);
                for (std::size_t c = 0; c < z.cols; ++c) g[c] += w * unit(k, c);
            }
            // project out the radial component: cosine is invariant to row scale
            double radial = 0.0;
            for (std::size_t c = 0; c < z.cols; ++c) radial += unit(i, c) * g[c];
            for (std::size_t c = 0; c < z.cols; ++c) (*grad)(i, c) = (g[c] - radial * unit(i, c)) / norms[i];
        }
    }
    return total / static_cast<double>(m);
}

double nt_xent_loss(const ViewBatch& batch) { return nt_xent_loss_and_grad(batch, nullptr); }

Matrix nt_xent_grad(const ViewBatch& batch) {
    Matrix g;
    nt_xent_loss_and_grad(batch, &g);
    return g;
}

ToyEncoderParams ToyEncoderParams::init(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim,
                                        std::uint64_t seed) {
    if (input_dim == 0 || hidden_dim == 0 || output_dim == 0) throw ParameterError("encoder dimensions must be positive");
    detail::Rng rng(seed);
    ToyEncoderParams p;
    p.input_dim = input_dim;
    p.hidden_dim = hidden_dim;
    p.output_dim = output_dim;
    p.w1 = Matrix(hidden_dim, input_dim);
    p.w2 = Matrix(output_dim, hidden_dim);
    p.b1.assign(hidden_dim, 0.0);
    p.b2.assign(output_dim, 0.0);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    for (auto& w : p.w1.data) w = s1 * rng.normal();
    for (auto& w : p.w2.data) w = s2 * rng.normal();
    return p;
}

namespace {

// Hidden activations and output for one input.
void forward(const ToyEncoderParams& p, std::span<const double> x, std::span<double> hidden, std::span<double> out) {
    for (std::size_t h = 0; h < p.hidden_dim; ++h) {
        double a = p.b1[h];
        for (std::size_t c = 0; c < p.input_dim; ++c) a += p.w1(h, c) * x[c];
        hidden[h] = std::tanh(a);
    }
    for (std::size_t o = 0; o < p.output_dim; ++o) {
        double a = p.b2[o];
        for (std::size_t h = 0; h < p.hidden_dim; ++h) a += p.w2(o, h) * hidden[h];
        out[o] = a;
    }
}

void check_finite(const ToyEncoderParams& p) {
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(p.w1.data) || !finite(p.b1) || !finite(p.w2.data) || !finite(p.b2)) {
        throw DataError("encoder parameters must be finite");
    }
    if (p.w1.rows != p.hidden_dim || p.w1.cols != p.input_dim || p.w2.rows != p.output_dim ||
        p.w2.cols != p.hidden_dim || p.b1.size() != p.hidden_dim || p.b2.size() != p.output_dim) {
        throw ParameterError("encoder parameter shapes are inconsistent");
    }
}

}  // namespace

std::vector<double> ToyEncoderParams::encode(std::span<const double> x) const {
    if (x.size() != input_dim) throw ParameterError("encoder input has the wrong dimension");
    std::vector<double> hidden(hidden_dim);
    std::vector<double> out(output_dim);
    forward(*this, x, hidden, out);
    return out;
}

EmbeddingMatrix ToyEncoderParams::encode(const EmbeddingMatrix& x) const {
    if (x.cols() != input_dim) throw ParameterError("encoder input has the wrong dimension");
    std::vector<double> out(x.rows() * output_dim);
    std::vector<double> hidden(hidden_dim);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        forward(*this, x.row(i), hidden, std::span<double>(out.data() + i * output_dim, output_dim));
    }
    return EmbeddingMatrix(x.rows(), output_dim, std::move(out));
}

ToyTrainingResult train_toy_encoder(const EmbeddingMatrix& data, const ToyEncoderParams& init,
                                    const ToyTrainingConfig& config) {
    check_finite(init);
    if (data.cols() != init.input_dim) throw ParameterError("training data dimension does not match the encoder input");
    if (!(config.learning_rate >= 0.0)) throw ParameterError("learning rate must be non-negative");
    if (config.epochs < 1) throw ParameterError("training needs at least one epoch");
    if (config.batch_n < 2) throw ParameterError("batch_n must be at least 2 (negatives are needed)");
    if (data.rows() < 2) throw ParameterError("training needs at least two samples");
    if (!(config.noise_scale >= 0.0)) throw ParameterError("noise scale must be non-negative");

    ToyTrainingResult result{init, {}};
    ToyEncoderParams& p = result.params;
    detail::Rng rng(config.seed);
    const std::size_t in = p.input_dim, hid = p.hidden_dim, out = p.output_dim;

    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> views, hidden, embed;
    ToyEncoderParams step;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start + 2 <= order.size(); start += config.batch_n) {
            const std::size_t count = std::min(config.batch_n, order.size() - start);
            if (count < 2) break;
            const std::size_t m = 2 * count;
            views.assign(m * in, 0.0);
            hidden.assign(m * hid, 0.0);
            embed.assign(m * out, 0.0);
            for (std::size_t s = 0; s < count; ++s) {
                auto x = data.row(order[start + s]);
                for (std::size_t v = 0; v < 2; ++v) {
                    for (std::size_t c = 0; c < in; ++c) {
                        views[(2 * s + v) * in + c] = x[c] + config.noise_scale * rng.normal();
                    }
                }
            }
            for (std::size_t r = 0; r < m; ++r) {
                forward(p, std::span<const double>(views.data() + r * in, in), std::span<double>(hidden.data() + r * hid, hid),
                        std::span<double>(embed.data() + r * out, out));
            }

            Matrix g;
            double loss;
            try {
                loss = nt_xent_loss_and_grad(ViewBatch(Matrix(m, out, embed), config.tau), &g);
            } catch (const Error& e) {
                throw TrainingError(std::string("training diverged: ") + e.what(), static_cast<int>(epoch) - 1);
            }
            if (!std::isfinite(loss)) {
                throw TrainingError("training loss became non-finite in epoch " + std::to_string(epoch),
                                    static_cast<int>(epoch) - 1);
            }
            epoch_loss += loss;
            ++batches;

            // backpropagate through z = W2 h + b2, h = tanh(W1 x + b1)
            step = ToyEncoderParams{in, hid, out, Matrix(hid, in), std::vector<double>(hid, 0.0), Matrix(out, hid),
                                    std::vector<double>(out, 0.0)};
            std::vector<double> dh(hid);
            for (std::size_t r = 0; r < m; ++r) {
                const double* gz = g.data.data() + r * out;
                const double* h = hidden.data() + r * hid;
                const double* x = views.data() + r * in;
                std::fill(dh.begin(), dh.end(), 0.0);
                for (std::size_t o = 0; o < out; ++o) {
                    step.b2[o] += gz[o];
                    for (std::size_t k = 0; k < hid; ++k) {
                        step.w2(o, k) += gz[o] * h[k];
                        dh[k] += p.w2(o, k) * gz[o];
                    }
                }
                for (std::size_t k = 0; k < hid; ++k) {
                    const double da = dh[k] * (1.0 - h[k] * h[k]);
                    step.b1[k] += da;
                    for (std::size_t c = 0; c < in; ++c) step.w1(k, c) += da * x[c];
                }
            }
            const double lr = config.learning_rate;
            for (std::size_t i = 0; i < p.w1.data.size(); ++i) p.w1.data[i] -= lr * step.w1.data[i];
            for (std::size_t i = 0; i < p.b1.size(); ++i) p.b1[i] -= lr * step.b1[i];
            for (std::size_t i = 0; i < p.w2.data.size(); ++i) p.w2.data[i] -= lr * step.w2.data[i];
            for (std::size_t i = 0; i < p.b2.size(); ++i) p.b2[i] -= lr * step.b2[i];
        }
        const double mean = epoch_loss / static_cast<double>(batches);
        if (!std::isfinite(mean)) {
            throw TrainingError("training loss became non-finite in epoch " + std::to_string(epoch),
                                static_cast<int>(epoch) - 1);
        }
        result.epoch_loss.push_back(mean);
    }
    return result;
}

void write_training_curve(const std::vector<double>& epoch_loss, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "epoch,mean_loss\n";
    char buf[64];
    for (std::size_t e = 0; e < epoch_loss.size(); ++e) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), epoch_loss[e]);
        out << (e + 1) << ',';
        out.write(buf, ptr - buf);
        out << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

void save_toy_encoder(const ToyEncoderParams& params, const std::filesystem::path& path) {
    check_finite(params);
    detail::BinaryWriter out(path);
    out.magic({kMagic, 4});
    out.put<std::uint8_t>(kVersion);
    out.put<std::uint32_t>(static_cast<std::uint32_t>(params.input_dim));
    out.put<std::uint32_t>(static_cast<std::uint32_t>(params.hidden_dim));
    out.put<std::uint32_t>(static_cast<std::uint32_t>(params.output_dim));
    out.put_span<double>(params.w1.data);
    out.put_span<double>(params.b1);
    out.put_span<double>(params.w2.data);
    out.put_span<double>(params.b2);
    out.finish();
}

ToyEncoderParams load_toy_encoder(const std::filesystem::path& path) {
    detail::BinaryReader in(path);
    in.expect_magic({kMagic, 4});
    auto version = in.get<std::uint8_t>();
    if (version != kVersion) throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
    ToyEncoderParams p;
    p.input_dim = in.get<std::uint32_t>();
    p.hidden_dim = in.get<std::uint32_t>();
    p.output_dim = in.get<std::uint32_t>();
    if (p.input_dim == 0 || p.hidden_dim == 0 || p.output_dim == 0) throw FormatError(path.string() + ": zero dimension");
    p.w1 = Matrix(p.hidden_dim, p.input_dim, in.get_vector<double>(p.hidden_dim * p.input_dim));
    p.b1 = in.get_vector<double>(p.hidden_dim);
    p.w2 = Matrix(p.output_dim, p.hidden_dim, in.get_vector<double>(p.output_dim * p.hidden_dim));
    p.b2 = in.get_vector<double>(p.output_dim);
    in.expect_end();
    check_finite(p);
    return p;
}

}  // namespace oodkit
