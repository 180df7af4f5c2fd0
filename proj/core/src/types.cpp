#include "alime/types.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "alime/error.hpp"

namespace alime {

SuperpixelSegmentation::SuperpixelSegmentation(std::size_t width, std::size_t height, std::vector<int> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
    if (labels_.size() != width * height) throw DimensionError("label map size does not match width*height");
    if (labels_.empty()) throw ParameterError("segmentation must cover at least one pixel");
    const int max_label = *std::max_element(labels_.begin(), labels_.end());
    if (*std::min_element(labels_.begin(), labels_.end()) < 0) throw ParameterError("negative superpixel label");
    n_segments_ = static_cast<std::size_t>(max_label) + 1;
    std::vector<bool> seen(n_segments_, false);
    for (int l : labels_) seen[static_cast<std::size_t>(l)] = true;
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw ParameterError("superpixel labels must be contiguous from 0");
}

std::vector<std::size_t> SuperpixelSegmentation::segment_sizes() const {
    std::vector<std::size_t> sizes(n_segments_, 0);
    for (int l : labels_) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

RelevanceMap project_explanation(const Explanation& explanation, const SuperpixelSegmentation& seg) {
    if (explanation.coefficients.size() != seg.n_segments())
        throw DimensionError("explanation has " + std::to_string(explanation.coefficients.size()) +
                             " coefficients for " + std::to_string(seg.n_segments()) + " superpixels");
    RelevanceMap map{seg.width(), seg.height(), std::vector<double>(seg.labels().size())};
    const auto labels = seg.labels();
    for (std::size_t i = 0; i < labels.size(); ++i)
        map.values[i] = explanation.coefficients[static_cast<std::size_t>(labels[i])];
    return map;
}

std::string explanation_to_json(const Explanation& explanation) {
    nlohmann::json j;
    j["class_id"] = explanation.class_id;
    j["intercept"] = explanation.intercept;
    j["coefficients"] = explanation.coefficients;
    j["config_digest"] = explanation.config_digest;
    return j.dump(2);
}

Explanation explanation_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        Explanation e;
        e.class_id = j.at("class_id").get<int>();
        e.intercept = j.at("intercept").get<double>();
        e.coefficients = j.at("coefficients").get<std::vector<double>>();
        e.config_digest = j.at("config_digest").get<std::string>();
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw ParameterError(std::string("malformed explanation document: ") + ex.what());
    }
}

}  // namespace alime
