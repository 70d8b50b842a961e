#ifndef OODKIT_SYNTHETIC_HPP
#define OODKIT_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>
#include <span>

#include "oodkit/embedding.hpp"

namespace oodkit {

/// n isotropic Gaussian samples around `center`, deterministic in `seed`.
EmbeddingMatrix gaussian_blob(std::size_t n, std::span<const double> center, double stddev, std::uint64_t seed);

/// n 2-D samples alternating between blobs at (-2, 0) and (2, 0), sd 0.3.
EmbeddingMatrix two_cluster_data(std::size_t n, std::uint64_t seed);

/// Row-wise concatenation; both inputs must share a dimension.
EmbeddingMatrix concat_rows(const EmbeddingMatrix& a, const EmbeddingMatrix& b);

}  // namespace oodkit

#endif  // OODKIT_SYNTHETIC_HPP
