#include "oodkit/model_io.hpp"

#include "binary_io.hpp"
#include "oodkit/errors.hpp"

namespace oodkit {

ModelKind detect_model_kind(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error("cannot open " + path.string());
    auto magic = detail::peek_magic(path);
    if (magic == "LOFM") return ModelKind::lof;
    if (magic == "SSDM") return ModelKind::ssd;
    throw FormatError(path.string() + ": not a detector model container");
}

}  // namespace oodkit
