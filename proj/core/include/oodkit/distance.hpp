#ifndef OODKIT_DISTANCE_HPP
#define OODKIT_DISTANCE_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace oodkit {

enum class Metric { cosine, euclidean };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);

/// 1 - cos(a, b), clamped to [0, 2]. Throws DomainError on a zero vector or
/// a dimension mismatch.
double cosine_distance(std::span<const double> a, std::span<const double> b);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Dispatches on `metric`.
double distance(Metric metric, std::span<const double> a, std::span<const double> b);

/// Cosine distance given 1/|a| and 1/|b|; no validation. Produces the same
/// bits as cosine_distance(). Evaluated as |a/|a| - b/|b||^2 / 2, which equals
/// 1 - cos(a, b) but keeps full relative precision for nearly parallel rows.
inline double cosine_distance_scaled(std::span<const double> a, double inv_norm_a,
                                     std::span<const double> b, double inv_norm_b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] * inv_norm_a - b[i] * inv_norm_b;
        s += diff * diff;
    }
    const double d = 0.5 * s;
    return d > 2.0 ? 2.0 : d;
}

}  // namespace oodkit

#endif  // OODKIT_DISTANCE_HPP
