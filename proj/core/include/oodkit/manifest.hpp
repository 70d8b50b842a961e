#ifndef OODKIT_MANIFEST_HPP
#define OODKIT_MANIFEST_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace oodkit {

enum class Split { train, val, test, unassigned };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct SampleRecord {
    std::string sample_id;
    std::string group_id;  // lesion identity
    std::string class_label;
    std::string source;    // acquisition site
    Split split = Split::unassigned;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

/**
 * Ordered per-sample metadata. Row i describes row i of the companion
 * embedding file, so ordering is significant and preserved by every
 * operation that does not explicitly select.
 *
 * Construction enforces unique sample ids and that every group sits in a
 * single split.
 */
class SampleManifest {
public:
    SampleManifest() = default;
    explicit SampleManifest(std::vector<SampleRecord> records);
    /// `source_rows[i]` is the embedding-file row of record i.
    SampleManifest(std::vector<SampleRecord> records, std::vector<std::size_t> source_rows);

    const std::vector<SampleRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const SampleRecord& operator[](std::size_t i) const { return records_[i]; }

    /// Row of each record in the originally loaded manifest, and so in the
    /// companion embedding file. Identity for a freshly loaded manifest;
    /// composed through repeated filtering.
    const std::vector<std::size_t>& source_rows() const { return source_rows_; }

    friend bool operator==(const SampleManifest&, const SampleManifest&) = default;

private:
    std::vector<SampleRecord> records_;
    std::vector<std::size_t> source_rows_;
};

SampleManifest read_manifest(const std::filesystem::path& path);
SampleManifest parse_manifest(std::istream& in);
void write_manifest(const SampleManifest& manifest, const std::filesystem::path& path);
void write_manifest(const SampleManifest& manifest, std::ostream& out);

/// An empty set or missing split means "no restriction" on that axis.
struct SubsetFilter {
    std::set<std::string> classes;
    std::set<std::string> sources;
    std::optional<Split> split;

    bool matches(const SampleRecord& r) const;
    std::string describe() const;

    friend bool operator==(const SubsetFilter&, const SubsetFilter&) = default;
};

/// Records matching every axis of `filter`, in manifest order. Throws
/// EmptySelectionError when nothing matches.
SampleManifest filter_subset(const SampleManifest& manifest, const SubsetFilter& filter);

}  // namespace oodkit

#endif  // OODKIT_MANIFEST_HPP
