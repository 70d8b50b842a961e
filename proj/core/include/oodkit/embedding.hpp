#ifndef OODKIT_EMBEDDING_HPP
#define OODKIT_EMBEDDING_HPP

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace oodkit {

enum class EmbeddingFormat { binary, csv };

/**
 * Dense n x d matrix of feature vectors, one sample per row, row-major.
 *
 * Construction validates that the shape is non-empty and every entry is
 * finite; the object is immutable afterwards. When `normalized()` is true
 * every row has unit L2 norm to within 1e-6.
 */
class EmbeddingMatrix {
public:
    EmbeddingMatrix(std::size_t n, std::size_t d, std::vector<double> data, bool normalized = false);

    std::size_t rows() const { return n_; }
    std::size_t cols() const { return d_; }
    bool normalized() const { return normalized_; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * d_, d_}; }
    std::span<const double> data() const { return data_; }

    /// Rows at the given indices, in the given order.
    EmbeddingMatrix select(std::span<const std::size_t> indices) const;

    friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

private:
    std::size_t n_;
    std::size_t d_;
    std::vector<double> data_;
    bool normalized_;
};

/// Reads the "OODE" binary container or a header-less csv.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, EmbeddingFormat format);

/// Writes the binary container. Values are narrowed to 32-bit floats.
void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);

/// Writes a header-less csv with round-trippable decimal values.
void save_embeddings_csv(const EmbeddingMatrix& m, const std::filesystem::path& path);

/// Guess the format from the extension: ".csv" is csv, everything else binary.
EmbeddingFormat format_from_path(const std::filesystem::path& path);

/// Scales every row to unit L2 norm. Throws DataError naming the first zero row.
EmbeddingMatrix l2_normalize(const EmbeddingMatrix& m);

}  // namespace oodkit

#endif  // OODKIT_EMBEDDING_HPP
