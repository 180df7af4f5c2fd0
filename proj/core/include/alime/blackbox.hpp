#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "alime/image.hpp"
#include "alime/types.hpp"

namespace alime {

enum class InputKind { image, point2d };

std::string to_string(InputKind kind);
InputKind input_kind_from_string(const std::string& name);

/// The model under explanation. Every call returns one probability row per
/// input, in input order; rows are non-negative and sum to 1.
class BlackBox {
public:
    virtual ~BlackBox() = default;

    virtual std::size_t n_classes() const = 0;
    virtual InputKind input_kind() const = 0;

    /// n x n_classes. The default throws ParameterError for non-image models.
    virtual Matrix predict_images(std::span<const Image> images);
    /// Rows of `points` are inputs. The default throws ParameterError.
    virtual Matrix predict_points(const Matrix& points);
};

/// Throws ParameterError unless every row has the right length, is
/// non-negative, and sums to 1 within `tolerance`.
void validate_probabilities(const Matrix& probs, std::size_t n_rows, std::size_t n_classes,
                            double tolerance = 1e-6);

/// Numerically stable softmax of one row of logits.
std::vector<double> softmax(std::span<const double> logits);

/// Four-class image model: logits are 4 * mean luminance of the TL, TR, BL and
/// BR quadrants (split at floor(H/2), floor(W/2); an empty quadrant has mean 0).
std::unique_ptr<BlackBox> builtin_quadrant_classifier();

/// Two-class image model with logits (0, mean pixel value over every channel).
std::unique_ptr<BlackBox> builtin_mean_pixel_classifier();

/// Returns the same probability row for every input of either kind.
std::unique_ptr<BlackBox> constant_blackbox(std::vector<double> probs, InputKind kind = InputKind::image);

/// Parses "builtin:quadrant", "builtin:meanpixel" or cmd:"<shell command>".
std::unique_ptr<BlackBox> make_blackbox(const std::string& spec, InputKind kind = InputKind::image);

}  // namespace alime
