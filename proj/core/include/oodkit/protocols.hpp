#ifndef OODKIT_PROTOCOLS_HPP
#define OODKIT_PROTOCOLS_HPP

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "oodkit/eval.hpp"

namespace oodkit {

/// Diagnostic classes treated as in-distribution for the ISIC 2019 protocols.
const std::set<std::string>& isic_id_classes();
/// The rare classes held out as OOD: DF and VASC.
const std::set<std::string>& isic_ood_classes();

/**
 * Named experiment layouts. Table-1 style columns: isic2019, isic2019-nv,
 * ham, ham-nv, bcn, bcn-nv, cifar10. Source probes: ham-vs-bcn-6,
 * ham-vs-bcn-nv (fit on HAM train, BCN test samples act as the OOD side).
 */
std::vector<std::string> protocol_names();
ExperimentConfig protocol_config(std::string_view name, const DetectorSpec& detector);

/// K values conventionally swept for the protocol.
std::vector<std::size_t> protocol_default_ks(std::string_view name);

/// Published full-scale AUROC for a protocol and detector label ("K = 10",
/// "SSD", "Supervised"), when one exists.
std::optional<double> reference_auroc(std::string_view protocol, std::string_view label);

}  // namespace oodkit

#endif  // OODKIT_PROTOCOLS_HPP
