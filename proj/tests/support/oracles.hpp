#ifndef OODKIT_TESTS_ORACLES_HPP
#define OODKIT_TESTS_ORACLES_HPP

// Straight-line reference implementations used only by tests. They share no
// code with the library: full distance matrices, full sorts, explicit inverses.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Rows = std::vector<Vec>;

// Distances are accumulated in long double so that the reference is more
// precise than the code under test, including for nearly parallel rows.
inline double cosine(const Vec& a, const Vec& b) {
    long double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += static_cast<long double>(a[i]) * b[i];
        aa += static_cast<long double>(a[i]) * a[i];
        bb += static_cast<long double>(b[i]) * b[i];
    }
    return static_cast<double>(1.0L - ab / (std::sqrt(aa) * std::sqrt(bb)));
}

inline double euclid(const Vec& a, const Vec& b) {
    long double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const long double diff = static_cast<long double>(a[i]) - b[i];
        s += diff * diff;
    }
    return static_cast<double>(std::sqrt(s));
}

inline double dist(bool use_cosine, const Vec& a, const Vec& b) { return use_cosine ? cosine(a, b) : euclid(a, b); }

/// Every reference point sorted by (distance, index) from `q`, optionally skipping `skip`.
inline std::vector<std::pair<double, std::size_t>> sorted_neighbors(const Rows& train, const Vec& q, bool use_cosine,
                                                                    std::size_t skip = SIZE_MAX) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < train.size(); ++j) {
        if (j != skip) all.emplace_back(dist(use_cosine, q, train[j]), j);
    }
    std::sort(all.begin(), all.end());
    return all;
}

struct Lof {
    std::vector<double> kdist;
    std::vector<double> lrd;
    std::vector<std::vector<std::pair<double, std::size_t>>> neighbors;
};

inline Lof fit_lof(const Rows& train, std::size_t k, bool use_cosine) {
    const std::size_t n = train.size();
    Lof m;
    m.kdist.resize(n);
    m.lrd.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto all = sorted_neighbors(train, train[i], use_cosine, i);
        all.resize(k);
        m.kdist[i] = all.back().first;
        m.neighbors.push_back(all);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (auto [d, o] : m.neighbors[i]) s += std::max({m.kdist[o], d, 1e-12});
        m.lrd[i] = k / s;
    }
    return m;
}

inline double lof_score(const Lof& m, const Rows& train, const Vec& q, std::size_t k, bool use_cosine) {
    auto nn = sorted_neighbors(train, q, use_cosine);
    nn.resize(k);
    double reach = 0, lrd_sum = 0;
    for (auto [d, o] : nn) {
        reach += std::max({m.kdist[o], d, 1e-12});
        lrd_sum += m.lrd[o];
    }
    double lrd_q = k / reach;
    return (lrd_sum / k) / lrd_q;
}

/// 2 * #(ood > id) + #(ood == id), by counting every pair.
inline std::uint64_t twice_pairwise_wins(const std::vector<double>& id, const std::vector<double>& ood) {
    std::uint64_t w = 0;
    for (double o : ood) {
        for (double i : id) w += o > i ? 2 : (o == i ? 1 : 0);
    }
    return w;
}

inline double pairwise_auroc(const std::vector<double>& id, const std::vector<double>& ood) {
    return static_cast<double>(twice_pairwise_wins(id, ood)) / (2.0 * id.size() * ood.size());
}

/// Gauss-Jordan inverse with partial pivoting.
inline Rows invert(Rows a) {
    const std::size_t n = a.size();
    Rows inv(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        }
        if (a[p][c] == 0.0) throw std::runtime_error("singular");
        std::swap(a[p], a[c]);
        std::swap(inv[p], inv[c]);
        double piv = a[c][c];
        for (std::size_t j = 0; j < n; ++j) {
            a[c][j] /= piv;
            inv[c][j] /= piv;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = a[r][c];
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[c][j];
                inv[r][j] -= f * inv[c][j];
            }
        }
    }
    return inv;
}

inline double quad_form(const Rows& m, const Vec& x) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) s += x[i] * m[i][j] * x[j];
    }
    return s;
}

/// Central difference of `f` at every coordinate of `x`.
template <typename F>
Vec central_difference(F&& f, Vec x, double h) {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2 * h);
    }
    return g;
}

inline Rows random_rows(std::size_t n, std::size_t d, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Rows r(n, Vec(d));
    for (auto& row : r) {
        for (auto& v : row) v = u(rng);
    }
    return r;
}

inline std::vector<double> flatten(const Rows& rows) {
    std::vector<double> out;
    for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
    return out;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace oracle

#endif  // OODKIT_TESTS_ORACLES_HPP
