#include "oodkit/protocols.hpp"

#include <map>
#include <utility>

#include "oodkit/errors.hpp"

namespace oodkit {

namespace {

struct ProtocolSpec {
    std::set<std::string> id_classes;  // empty = any
    std::set<std::string> fit_sources;
    std::set<std::string> ood_classes;
    std::set<std::string> ood_sources;
    std::optional<Split> ood_split;
    bool source_probe = false;
};

const std::map<std::string, ProtocolSpec, std::less<>>& registry() {
    static const auto table = [] {
        const std::set<std::string> six = isic_id_classes();
        const std::set<std::string> nv = {"NV"};
        const std::set<std::string> rare = isic_ood_classes();
        return std::map<std::string, ProtocolSpec, std::less<>>{
            {"isic2019", {six, {}, rare, {}, std::nullopt}},
            {"isic2019-nv", {nv, {}, rare, {}, std::nullopt}},
            {"ham", {six, {"HAM"}, rare, {"HAM"}, std::nullopt}},
            {"ham-nv", {nv, {"HAM"}, rare, {"HAM"}, std::nullopt}},
            {"bcn", {six, {"BCN"}, rare, {"BCN"}, std::nullopt}},
            {"bcn-nv", {nv, {"BCN"}, rare, {"BCN"}, std::nullopt}},
            {"cifar10", {{}, {"CIFAR10"}, {}, {"SVHN"}, std::nullopt}},
            {"ham-vs-bcn-6", {six, {"HAM"}, six, {"BCN"}, Split::test, true}},
            {"ham-vs-bcn-nv", {nv, {"HAM"}, nv, {"BCN"}, Split::test, true}},
        };
    }();
    return table;
}

using RefRow = std::map<std::string, double, std::less<>>;

const std::map<std::string, RefRow, std::less<>>& references() {
    static const std::map<std::string, RefRow, std::less<>> table = {
        {"isic2019", {{"K = 10", 0.675}, {"K = 50", 0.668}, {"K = 100", 0.655}, {"K = 200", 0.648}, {"K = 300", 0.646}, {"SSD", 0.600}}},
        {"isic2019-nv", {{"K = 10", 0.711}, {"K = 50", 0.749}, {"K = 100", 0.734}, {"K = 200", 0.739}, {"K = 300", 0.752}, {"SSD", 0.800}}},
        {"ham", {{"K = 10", 0.749}, {"K = 50", 0.774}, {"K = 100", 0.779}, {"K = 200", 0.770}, {"K = 300", 0.760}, {"SSD", 0.789}, {"Supervised", kSupervisedHamReferenceAuroc}}},
        {"ham-nv", {{"K = 10", 0.798}, {"K = 50", 0.884}, {"K = 100", 0.895}, {"K = 200", 0.887}, {"K = 300", 0.873}, {"SSD", 0.898}}},
        {"bcn", {{"K = 10", 0.642}, {"K = 50", 0.602}, {"K = 100", 0.587}, {"K = 200", 0.567}, {"K = 300", 0.562}, {"SSD", 0.560}}},
        {"bcn-nv", {{"K = 10", 0.664}, {"K = 50", 0.646}, {"K = 100", 0.615}, {"K = 200", 0.604}, {"K = 300", 0.615}, {"SSD", 0.721}}},
        {"cifar10", {{"K = 10", 0.841}, {"K = 50", 0.894}, {"K = 100", 0.922}, {"K = 200", 0.941}, {"K = 300", 0.945}, {"SSD", 0.991}}},
        {"ham-vs-bcn-6", {{"K = 40", 0.946}, {"K = 50", 0.948}, {"K = 60", 0.951}, {"K = 70", 0.952}, {"K = 100", 0.956}, {"K = 200", 0.956}, {"K = 250", 0.955}, {"K = 300", 0.954}}},
        {"ham-vs-bcn-nv", {{"K = 40", 0.955}, {"K = 50", 0.958}, {"K = 60", 0.959}, {"K = 70", 0.960}, {"K = 100", 0.961}, {"K = 200", 0.954}, {"K = 250", 0.950}, {"K = 300", 0.947}}},
    };
    return table;
}

}  // namespace

const std::set<std::string>& isic_id_classes() {
    static const std::set<std::string> classes = {"AK", "BCC", "BKL", "MEL", "NV", "SCC"};
    return classes;
}

const std::set<std::string>& isic_ood_classes() {
    static const std::set<std::string> classes = {"DF", "VASC"};
    return classes;
}

std::vector<std::string> protocol_names() {
    return {"isic2019", "isic2019-nv", "ham", "ham-nv", "bcn", "bcn-nv", "cifar10", "ham-vs-bcn-6", "ham-vs-bcn-nv"};
}

ExperimentConfig protocol_config(std::string_view name, const DetectorSpec& detector) {
    auto it = registry().find(name);
    if (it == registry().end()) throw ParameterError("unknown protocol \"" + std::string(name) + "\"");
    const auto& p = it->second;
    ExperimentConfig c;
    c.name = std::string(name);
    c.detector = detector;
    c.fit_filter = {p.id_classes, p.fit_sources, Split::train};
    c.id_eval_filter = {p.id_classes, p.fit_sources, Split::test};
    c.ood_eval_filter = {p.ood_classes, p.ood_sources, p.ood_split};
    return c;
}

std::vector<std::size_t> protocol_default_ks(std::string_view name) {
    if (name.starts_with("ham-vs-bcn")) return {40, 50, 60, 70, 100, 200, 250, 300};
    return {10, 50, 100, 200, 300};
}

std::optional<double> reference_auroc(std::string_view protocol, std::string_view label) {
    auto it = references().find(protocol);
    if (it == references().end()) return std::nullopt;
    auto cell = it->second.find(label);
    if (cell == it->second.end()) return std::nullopt;
    return cell->second;
}

}  // namespace oodkit
