#include "oodkit/split.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "oodkit/errors.hpp"
#include "rng.hpp"

namespace oodkit {

namespace {

struct GroupInfo {
    std::vector<std::size_t> rows;
    std::map<std::string, std::size_t> classes;
    std::map<std::string, std::size_t> sources;
};

// Most frequent key; ties go to the lexicographically smallest.
std::string majority(const std::map<std::string, std::size_t>& counts) {
    std::string best;
    std::size_t best_count = 0;
    for (const auto& [key, count] : counts) {
        if (count > best_count) {
            best = key;
            best_count = count;
        }
    }
    return best;
}

// Largest-remainder apportionment of `total` groups over the three ratios.
std::array<std::size_t, 3> apportion(std::size_t total, const std::array<double, 3>& ratios) {
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> remainders{};
    std::size_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
        double target = ratios[s] * static_cast<double>(total);
        counts[s] = static_cast<std::size_t>(std::floor(target));
        remainders[s] = target - static_cast<double>(counts[s]);
        assigned += counts[s];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainders[a] > remainders[b]; });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++counts[order[i % 3]];
    return counts;
}

}  // namespace

SampleManifest SplitAssignment::apply(const SampleManifest& manifest) const {
    std::vector<SampleRecord> records = manifest.records();
    for (auto& r : records) {
        auto it = assignment.find(r.sample_id);
        if (it == assignment.end()) throw ParameterError("sample \"" + r.sample_id + "\" has no split assignment");
        r.split = it->second;
    }
    return SampleManifest(std::move(records), manifest.source_rows());
}

SplitAssignment stratified_group_split(const SampleManifest& manifest, const SplitRatios& ratios,
                                       std::uint64_t seed) {
    const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
    for (double v : r) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("split ratios must be finite and non-negative");
    }
    if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
        throw ParameterError("split ratios must sum to 1, got " + std::to_string(r[0] + r[1] + r[2]));
    }
    if (manifest.empty()) throw ParameterError("cannot split an empty manifest");

    SplitAssignment out;
    out.ratios = ratios;
    out.seed = seed;

    std::map<std::string, GroupInfo> groups;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto& rec = manifest[i];
        auto& g = groups[rec.group_id];
        g.rows.push_back(i);
        ++g.classes[rec.class_label];
        ++g.sources[rec.source];
    }

    // (class, source) -> group ids, both levels in sorted order
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> strata;
    for (const auto& [gid, g] : groups) {
        auto cls = majority(g.classes);
        auto src = majority(g.sources);
        if (g.classes.size() > 1) {
            out.warnings.push_back("group \"" + gid + "\" has mixed class labels; assigned by majority label \"" +
                                   cls + "\"");
        }
        if (g.sources.size() > 1) {
            out.warnings.push_back("group \"" + gid + "\" has mixed sources; assigned by majority source \"" + src +
                                   "\"");
        }
        strata[{cls, src}].push_back(gid);
    }

    constexpr Split kSplits[3] = {Split::train, Split::val, Split::test};
    for (auto& [key, gids] : strata) {
        std::uint64_t stratum_seed = detail::fnv1a(key.second, detail::fnv1a(key.first) ^ 0x1f) ^ detail::splitmix64(seed);
        detail::Rng rng(detail::splitmix64(stratum_seed));
        rng.shuffle(gids);

        auto counts = apportion(gids.size(), r);
        StratumCounts sc{key.first, key.second, counts, {}};
        std::size_t pos = 0;
        for (int s = 0; s < 3; ++s) {
            for (std::size_t c = 0; c < counts[s]; ++c, ++pos) {
                for (auto row : groups[gids[pos]].rows) {
                    out.assignment[manifest[row].sample_id] = kSplits[s];
                    ++sc.samples[s];
                }
            }
        }
        out.strata.push_back(std::move(sc));
    }
    return out;
}

}  // namespace oodkit
