#ifndef OODKIT_TESTS_FIXTURE_HPP
#define OODKIT_TESTS_FIXTURE_HPP

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "oodkit/embedding.hpp"
#include "oodkit/manifest.hpp"
#include "test_paths.hpp"

struct SyntheticFixture {
    oodkit::EmbeddingMatrix embeddings;
    oodkit::SampleManifest manifest;
    nlohmann::json oracle;
};

/// The in-repo synthetic fixture and its independently computed reference values.
inline const SyntheticFixture& synthetic_fixture() {
    static const SyntheticFixture f = [] {
        std::ifstream in(fixture_dir() / "synthetic_oracle.json");
        return SyntheticFixture{
            oodkit::load_embeddings(fixture_dir() / "synthetic.oode", oodkit::EmbeddingFormat::binary),
            oodkit::read_manifest(fixture_dir() / "synthetic_manifest.csv"), nlohmann::json::parse(in)};
    }();
    return f;
}

#endif  // OODKIT_TESTS_FIXTURE_HPP
