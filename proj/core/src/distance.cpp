#include "oodkit/distance.hpp"

#include <cmath>
#include <string>

#include "oodkit/errors.hpp"

namespace oodkit {

std::string_view to_string(Metric metric) {
    return metric == Metric::cosine ? "cosine" : "euclidean";
}

Metric parse_metric(std::string_view name) {
    if (name == "cosine") return Metric::cosine;
    if (name == "euclidean") return Metric::euclidean;
    throw ParameterError("unknown metric \"" + std::string(name) + "\"");
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("cosine distance of vectors with different dimensions");
    double aa = dot(a, a);
    double bb = dot(b, b);
    if (aa == 0.0 || bb == 0.0) throw DomainError("cosine distance is undefined for a zero vector");
    return cosine_distance_scaled(a, 1.0 / std::sqrt(aa), b, 1.0 / std::sqrt(bb));
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("euclidean distance of vectors with different dimensions");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        s += diff * diff;
    }
    return std::sqrt(s);
}

double distance(Metric metric, std::span<const double> a, std::span<const double> b) {
    return metric == Metric::cosine ? cosine_distance(a, b) : euclidean_distance(a, b);
}

}  // namespace oodkit
