#ifndef OODKIT_MODEL_IO_HPP
#define OODKIT_MODEL_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace oodkit {

/// Provenance stored after the model body of every detector container.
struct FitMetadata {
    std::vector<std::string> fit_ids;  // sample ids the model was fitted on; may be empty
    bool normalized = false;           // rows were L2-normalized before fitting

    friend bool operator==(const FitMetadata&, const FitMetadata&) = default;
};

enum class ModelKind { lof, ssd };

/// Reads the container magic. Throws FormatError for anything else.
ModelKind detect_model_kind(const std::filesystem::path& path);

}  // namespace oodkit

#endif  // OODKIT_MODEL_IO_HPP
