#include "oodkit/synthetic.hpp"

#include <vector>

#include "oodkit/errors.hpp"
#include "rng.hpp"

namespace oodkit {

EmbeddingMatrix gaussian_blob(std::size_t n, std::span<const double> center, double stddev, std::uint64_t seed) {
    detail::Rng rng(seed);
    const std::size_t d = center.size();
    std::vector<double> data(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) data[i * d + j] = center[j] + stddev * rng.normal();
    }
    return EmbeddingMatrix(n, d, std::move(data));
}

EmbeddingMatrix two_cluster_data(std::size_t n, std::uint64_t seed) {
    detail::Rng rng(seed);
    std::vector<double> data(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        data[2 * i] = (i % 2 ? 2.0 : -2.0) + 0.3 * rng.normal();
        data[2 * i + 1] = 0.3 * rng.normal();
    }
    return EmbeddingMatrix(n, 2, std::move(data));
}

EmbeddingMatrix concat_rows(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
    if (a.cols() != b.cols()) throw ParameterError("cannot concatenate matrices of different widths");
    std::vector<double> data(a.data().begin(), a.data().end());
    data.insert(data.end(), b.data().begin(), b.data().end());
    return EmbeddingMatrix(a.rows() + b.rows(), a.cols(), std::move(data));
}

}  // namespace oodkit
