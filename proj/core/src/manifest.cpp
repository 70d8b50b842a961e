#include "oodkit/manifest.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "oodkit/errors.hpp"

namespace oodkit {

namespace {

constexpr std::string_view kHeader = "sample_id,group_id,class,source,split";

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string join(const std::set<std::string>& values) {
    std::string out;
    for (const auto& v : values) {
        if (!out.empty()) out += ',';
        out += v;
    }
    return out;
}

}  // namespace

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
        case Split::unassigned: return "unassigned";
    }
    return "unassigned";
}

Split parse_split(std::string_view name) {
    if (name == "train") return Split::train;
    if (name == "val") return Split::val;
    if (name == "test") return Split::test;
    if (name == "unassigned" || name.empty()) return Split::unassigned;
    throw FormatError("unknown split \"" + std::string(name) + "\"");
}

SampleManifest::SampleManifest(std::vector<SampleRecord> records) : records_(std::move(records)) {
    source_rows_.resize(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) source_rows_[i] = i;

    std::unordered_set<std::string> ids;
    std::unordered_map<std::string, Split> group_split;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.sample_id.empty()) throw DataError("empty sample_id", i);
        if (!ids.insert(r.sample_id).second) throw DataError("duplicate sample_id \"" + r.sample_id + "\"", i);
        auto [it, inserted] = group_split.emplace(r.group_id, r.split);
        if (!inserted && it->second != r.split) {
            throw DataError("group \"" + r.group_id + "\" spans splits " + std::string(to_string(it->second)) +
                                " and " + std::string(to_string(r.split)),
                            i);
        }
    }
}

SampleManifest::SampleManifest(std::vector<SampleRecord> records, std::vector<std::size_t> source_rows)
    : SampleManifest(std::move(records)) {
    if (source_rows.size() != records_.size()) throw ParameterError("source_rows length mismatch");
    source_rows_ = std::move(source_rows);
}

SampleManifest parse_manifest(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("manifest is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader) throw FormatError("manifest header must be \"" + std::string(kHeader) + "\"");

    std::vector<SampleRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_fields(line);
        if (f.size() != 5) {
            throw FormatError("manifest line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                              " fields, expected 5");
        }
        records.push_back({f[0], f[1], f[2], f[3], parse_split(f[4])});
    }
    return SampleManifest(std::move(records));
}

SampleManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return parse_manifest(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_manifest(const SampleManifest& manifest, std::ostream& out) {
    out << kHeader << '\n';
    for (const auto& r : manifest.records()) {
        out << r.sample_id << ',' << r.group_id << ',' << r.class_label << ',' << r.source << ','
            << to_string(r.split) << '\n';
    }
}

void write_manifest(const SampleManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_manifest(manifest, out);
    if (!out) throw Error("write failed: " + path.string());
}

bool SubsetFilter::matches(const SampleRecord& r) const {
    if (!classes.empty() && !classes.contains(r.class_label)) return false;
    if (!sources.empty() && !sources.contains(r.source)) return false;
    if (split && *split != r.split) return false;
    return true;
}

std::string SubsetFilter::describe() const {
    std::ostringstream s;
    s << "classes=" << (classes.empty() ? "*" : join(classes)) << " sources=" << (sources.empty() ? "*" : join(sources))
      << " split=" << (split ? to_string(*split) : "*");
    return s.str();
}

SampleManifest filter_subset(const SampleManifest& manifest, const SubsetFilter& filter) {
    std::vector<SampleRecord> records;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        if (filter.matches(manifest[i])) {
            records.push_back(manifest[i]);
            rows.push_back(manifest.source_rows()[i]);
        }
    }
    if (records.empty()) throw EmptySelectionError("selection matched no samples: " + filter.describe());
    return SampleManifest(std::move(records), std::move(rows));
}

}  // namespace oodkit
