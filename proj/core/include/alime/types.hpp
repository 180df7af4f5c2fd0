#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace alime {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Label map over an H x W grid. Labels cover exactly {0..n_segments-1} and
/// every label owns at least one pixel; the constructor enforces both.
class SuperpixelSegmentation {
public:
    SuperpixelSegmentation() = default;
    SuperpixelSegmentation(std::size_t width, std::size_t height, std::vector<int> labels);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t n_segments() const noexcept { return n_segments_; }
    int label(std::size_t row, std::size_t col) const noexcept { return labels_[row * width_ + col]; }
    std::span<const int> labels() const noexcept { return labels_; }

    /// Pixel count per label.
    std::vector<std::size_t> segment_sizes() const;

    friend bool operator==(const SuperpixelSegmentation&, const SuperpixelSegmentation&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::size_t n_segments_ = 0;
    std::vector<int> labels_;
};

/// Bit s is 1 when superpixel s keeps its original pixels, 0 when it is perturbed.
using InterpretableMask = std::vector<std::uint8_t>;

struct Neighbourhood {
    std::vector<InterpretableMask> masks;
    std::vector<double> targets;
    std::vector<double> distances;
    std::vector<double> weights;

    std::size_t size() const noexcept { return masks.size(); }
};

struct Explanation {
    std::vector<double> coefficients;
    double intercept = 0.0;
    int class_id = 0;
    std::string config_digest;

    friend bool operator==(const Explanation&, const Explanation&) = default;
};

/// Pixel-space relevance, row-major H x W.
struct RelevanceMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;

    double at(std::size_t row, std::size_t col) const noexcept { return values[row * width + col]; }
    friend bool operator==(const RelevanceMap&, const RelevanceMap&) = default;
};

/// values[p] = coefficients[labels[p]]; the intercept is not projected.
RelevanceMap project_explanation(const Explanation& explanation, const SuperpixelSegmentation& seg);

std::string explanation_to_json(const Explanation& explanation);
Explanation explanation_from_json(const std::string& text);

}  // namespace alime
