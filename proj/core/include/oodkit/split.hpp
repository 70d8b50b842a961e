#ifndef OODKIT_SPLIT_HPP
#define OODKIT_SPLIT_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oodkit/manifest.hpp"

namespace oodkit {

struct SplitRatios {
    double train = 0.8;
    double val = 0.05;
    double test = 0.15;
};

/// Group counts realized for one (class, source) stratum.
struct StratumCounts {
    std::string class_label;
    std::string source;
    std::array<std::size_t, 3> groups{};   // train, val, test
    std::array<std::size_t, 3> samples{};
};

struct SplitAssignment {
    SplitRatios ratios;
    std::uint64_t seed = 0;
    std::map<std::string, Split> assignment;  // sample_id -> split
    std::vector<StratumCounts> strata;
    std::vector<std::string> warnings;

    /// Copy of `manifest` with the split column taken from `assignment`.
    SampleManifest apply(const SampleManifest& manifest) const;
};

/**
 * Assigns whole groups (lesions) to train/val/test, stratified by the
 * group's (class, source). Group counts per stratum follow the
 * largest-remainder rule, so each split is within one group of its target.
 * Groups whose samples disagree on class or source take the majority value
 * and produce a warning.
 */
SplitAssignment stratified_group_split(const SampleManifest& manifest, const SplitRatios& ratios,
                                       std::uint64_t seed);

}  // namespace oodkit

#endif  // OODKIT_SPLIT_HPP
