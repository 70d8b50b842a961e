#ifndef OODKIT_ERRORS_HPP
#define OODKIT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oodkit {

/// Base of every error raised by the library. The CLI maps any of these to a
/// nonzero exit status.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file header, magic, version or layout.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Invalid values inside otherwise well-formed input (NaN, zero rows, ragged csv).
class DataError : public Error {
public:
    using Error::Error;
    DataError(const std::string& what, std::size_t row)
        : Error(what + " (row " + std::to_string(row) + ")"), row_(row), has_row_(true) {}

    bool has_row() const { return has_row_; }
    std::size_t row() const { return row_; }

private:
    std::size_t row_ = 0;
    bool has_row_ = false;
};

/// Mathematical domain violation, e.g. cosine of a zero vector.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Caller supplied an out-of-range parameter (k, ratios, dimensions).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Training data carries no usable geometry (all points identical).
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

/// Factorization or other numerical routine failed.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A filter resolved to zero samples.
class EmptySelectionError : public Error {
public:
    using Error::Error;
};

/// Fit and evaluation selections share samples.
class LeakageError : public Error {
public:
    using Error::Error;
};

/// Contrastive training diverged.
class TrainingError : public Error {
public:
    TrainingError(const std::string& what, int last_finite_epoch)
        : Error(what), last_finite_epoch_(last_finite_epoch) {}

    /// 1-based; 0 when no epoch completed with a finite loss.
    int last_finite_epoch() const { return last_finite_epoch_; }

private:
    int last_finite_epoch_;
};

}  // namespace oodkit

#endif  // OODKIT_ERRORS_HPP
