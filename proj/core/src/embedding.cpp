#include "oodkit/embedding.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "binary_io.hpp"
#include "oodkit/distance.hpp"
#include "oodkit/errors.hpp"

namespace oodkit {

namespace {

constexpr char kMagic[] = "OODE";
constexpr std::uint8_t kVersion = 1;

void check_finite_rows(std::size_t n, std::size_t d, const std::vector<double>& data) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(data[i * d + j])) throw DataError("non-finite embedding value", i);
        }
    }
}

void reject_zero_rows(const EmbeddingMatrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        bool zero = true;
        for (double v : m.row(i)) zero = zero && v == 0.0;
        if (zero) throw DataError("zero embedding vector", i);
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

EmbeddingMatrix load_binary(const std::filesystem::path& path) {
    detail::BinaryReader in(path);
    in.expect_magic({kMagic, 4});
    auto version = in.get<std::uint8_t>();
    if (version != kVersion) throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
    auto n = in.get<std::uint32_t>();
    auto d = in.get<std::uint32_t>();
    if (n == 0 || d == 0) throw FormatError(path.string() + ": header declares an empty matrix");
    auto raw = in.get_vector<float>(static_cast<std::size_t>(n) * d);
    in.expect_end();
    std::vector<double> data(raw.begin(), raw.end());
    check_finite_rows(n, d, data);
    return EmbeddingMatrix(n, d, std::move(data));
}

EmbeddingMatrix load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<double> data;
    std::size_t d = 0;
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) {
        auto text = trim(line);
        if (text.empty()) continue;
        std::size_t cols = 0;
        std::size_t start = 0;
        while (true) {
            auto comma = text.find(',', start);
            auto field = trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
            if (ec != std::errc() || ptr != field.data() + field.size()) {
                // e.g. "+inf" is not accepted by from_chars
                std::string token(field);
                if (token.find("nan") != std::string::npos || token.find("inf") != std::string::npos ||
                    token.find("NaN") != std::string::npos || token.find("Inf") != std::string::npos) {
                    throw DataError("non-finite embedding value", n);
                }
                throw DataError("unparseable value \"" + token + "\"", n);
            }
            data.push_back(value);
            ++cols;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (n == 0) {
            d = cols;
        } else if (cols != d) {
            throw DataError("inconsistent row length " + std::to_string(cols) + ", expected " + std::to_string(d), n);
        }
        ++n;
    }
    if (n == 0) throw FormatError(path.string() + ": empty csv");
    check_finite_rows(n, d, data);
    return EmbeddingMatrix(n, d, std::move(data));
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t n, std::size_t d, std::vector<double> data, bool normalized)
    : n_(n), d_(d), data_(std::move(data)), normalized_(normalized) {
    if (n_ == 0 || d_ == 0) throw ParameterError("embedding matrix must have at least one row and column");
    if (data_.size() != n_ * d_) {
        throw ParameterError("embedding data has " + std::to_string(data_.size()) + " values, expected " +
                             std::to_string(n_ * d_));
    }
    check_finite_rows(n_, d_, data_);
    if (normalized_) {
        for (std::size_t i = 0; i < n_; ++i) {
            if (std::abs(l2_norm(row(i)) - 1.0) > 1e-6) throw DataError("row flagged normalized is not unit norm", i);
        }
    }
}

EmbeddingMatrix EmbeddingMatrix::select(std::span<const std::size_t> indices) const {
    if (indices.empty()) throw ParameterError("cannot select zero rows");
    std::vector<double> out;
    out.reserve(indices.size() * d_);
    for (auto i : indices) {
        if (i >= n_) throw ParameterError("row index " + std::to_string(i) + " out of range");
        auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    return EmbeddingMatrix(indices.size(), d_, std::move(out), normalized_);
}

EmbeddingFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? EmbeddingFormat::csv : EmbeddingFormat::binary;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
    auto m = format == EmbeddingFormat::binary ? load_binary(path) : load_csv(path);
    reject_zero_rows(m);
    return m;
}

void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
    if (m.rows() > std::numeric_limits<std::uint32_t>::max() || m.cols() > std::numeric_limits<std::uint32_t>::max()) {
        throw ParameterError("matrix too large for the binary container");
    }
    std::vector<float> narrow(m.data().begin(), m.data().end());
    detail::BinaryWriter out(path);
    out.magic({kMagic, 4});
    out.put<std::uint8_t>(kVersion);
    out.put<std::uint32_t>(static_cast<std::uint32_t>(m.rows()));
    out.put<std::uint32_t>(static_cast<std::uint32_t>(m.cols()));
    out.put_span<float>(narrow);
    out.finish();
}

void save_embeddings_csv(const EmbeddingMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    char buf[64];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) out << ',';
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), r[j]);
            out.write(buf, ptr - buf);
        }
        out << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

EmbeddingMatrix l2_normalize(const EmbeddingMatrix& m) {
    std::vector<double> out(m.data().begin(), m.data().end());
    const std::size_t d = m.cols();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double norm = l2_norm(m.row(i));
        if (norm == 0.0) throw DataError("cannot normalize a zero row", i);
        for (std::size_t j = 0; j < d; ++j) out[i * d + j] /= norm;
    }
    return EmbeddingMatrix(m.rows(), d, std::move(out), true);
}

}  // namespace oodkit
