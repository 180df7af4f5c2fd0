#include "alime/blackbox.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "alime/error.hpp"
#include "alime/subprocess.hpp"

namespace alime {

std::string to_string(InputKind kind) { return kind == InputKind::image ? "image" : "point2d"; }

InputKind input_kind_from_string(const std::string& name) {
    if (name == "image") return InputKind::image;
    if (name == "point2d") return InputKind::point2d;
    throw ParameterError("unknown input kind '" + name + "'");
}

Matrix BlackBox::predict_images(std::span<const Image>) {
    throw ParameterError("this black-box does not accept images");
}

Matrix BlackBox::predict_points(const Matrix&) {
    throw ParameterError("this black-box does not accept 2-D points");
}

void validate_probabilities(const Matrix& probs, std::size_t n_rows, std::size_t n_classes, double tolerance) {
    if (static_cast<std::size_t>(probs.rows()) != n_rows)
        throw ParameterError("expected " + std::to_string(n_rows) + " probability rows, got " +
                             std::to_string(probs.rows()));
    if (static_cast<std::size_t>(probs.cols()) != n_classes)
        throw ParameterError("expected " + std::to_string(n_classes) + " classes, got " + std::to_string(probs.cols()));
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        const auto row = probs.row(i);
        if (!row.allFinite() || (row.array() < 0.0).any())
            throw ParameterError("probability row " + std::to_string(i) + " has negative or non-finite entries");
        if (std::abs(row.sum() - 1.0) > tolerance)
            throw ParameterError("probability row " + std::to_string(i) + " sums to " + std::to_string(row.sum()));
    }
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.begin(), logits.end());
    if (out.empty()) return out;
    const double mx = *std::max_element(out.begin(), out.end());
    double sum = 0.0;
    for (auto& v : out) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (auto& v : out) v /= sum;
    return out;
}

namespace {

class QuadrantClassifier final : public BlackBox {
public:
    std::size_t n_classes() const override { return 4; }
    InputKind input_kind() const override { return InputKind::image; }

    Matrix predict_images(std::span<const Image> images) override {
        Matrix out(static_cast<Eigen::Index>(images.size()), 4);
        for (std::size_t i = 0; i < images.size(); ++i) {
            const auto probs = softmax(logits(images[i]));
            for (std::size_t k = 0; k < 4; ++k) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = probs[k];
        }
        return out;
    }

private:
    static std::array<double, 4> logits(const Image& image) {
        const auto lum = luminance(image);
        const std::size_t w = image.width(), h = image.height(), hw = w / 2, hh = h / 2;
        std::array<double, 4> sums{}, counts{};
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) {
                const std::size_t q = (r < hh ? 0 : 2) + (c < hw ? 0 : 1);
                sums[q] += lum[r * w + c];
                counts[q] += 1.0;
            }
        std::array<double, 4> out{};
        for (std::size_t q = 0; q < 4; ++q) out[q] = counts[q] > 0 ? 4.0 * sums[q] / counts[q] : 0.0;
        return out;
    }
};

class MeanPixelClassifier final : public BlackBox {
public:
    std::size_t n_classes() const override { return 2; }
    InputKind input_kind() const override { return InputKind::image; }

    Matrix predict_images(std::span<const Image> images) override {
        Matrix out(static_cast<Eigen::Index>(images.size()), 2);
        for (std::size_t i = 0; i < images.size(); ++i) {
            const auto px = images[i].data();
            double sum = 0.0;
            for (float v : px) sum += v;
            const double logits[2] = {0.0, px.empty() ? 0.0 : sum / static_cast<double>(px.size())};
            const auto probs = softmax(logits);
            out(static_cast<Eigen::Index>(i), 0) = probs[0];
            out(static_cast<Eigen::Index>(i), 1) = probs[1];
        }
        return out;
    }
};

class ConstantBlackBox final : public BlackBox {
public:
    ConstantBlackBox(std::vector<double> probs, InputKind kind) : probs_(std::move(probs)), kind_(kind) {
        Matrix row(1, static_cast<Eigen::Index>(probs_.size()));
        for (std::size_t k = 0; k < probs_.size(); ++k) row(0, static_cast<Eigen::Index>(k)) = probs_[k];
        validate_probabilities(row, 1, probs_.size());
    }
    std::size_t n_classes() const override { return probs_.size(); }
    InputKind input_kind() const override { return kind_; }
    Matrix predict_images(std::span<const Image> images) override { return rows(images.size()); }
    Matrix predict_points(const Matrix& points) override { return rows(static_cast<std::size_t>(points.rows())); }

private:
    Matrix rows(std::size_t n) const {
        Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(probs_.size()));
        for (Eigen::Index i = 0; i < out.rows(); ++i)
            for (std::size_t k = 0; k < probs_.size(); ++k) out(i, static_cast<Eigen::Index>(k)) = probs_[k];
        return out;
    }
    std::vector<double> probs_;
    InputKind kind_;
};

}  // namespace

std::unique_ptr<BlackBox> builtin_quadrant_classifier() { return std::make_unique<QuadrantClassifier>(); }

std::unique_ptr<BlackBox> builtin_mean_pixel_classifier() { return std::make_unique<MeanPixelClassifier>(); }

std::unique_ptr<BlackBox> constant_blackbox(std::vector<double> probs, InputKind kind) {
    return std::make_unique<ConstantBlackBox>(std::move(probs), kind);
}

std::unique_ptr<BlackBox> make_blackbox(const std::string& spec, InputKind kind) {
    if (spec == "builtin:quadrant") return builtin_quadrant_classifier();
    if (spec == "builtin:meanpixel") return builtin_mean_pixel_classifier();
    if (spec.rfind("cmd:", 0) == 0) {
        std::string cmd = spec.substr(4);
        if (cmd.size() >= 2 && cmd.front() == '"' && cmd.back() == '"') cmd = cmd.substr(1, cmd.size() - 2);
        if (cmd.empty()) throw ParameterError("empty black-box command");
        return subprocess_adapter({"/bin/sh", "-c", cmd}, kind);
    }
    throw ParameterError("unknown black-box spec '" + spec + "' (expected builtin:quadrant, builtin:meanpixel or cmd:\"...\")");
}

}  // namespace alime
