#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "alime/blackbox.hpp"
#include "alime/types.hpp"

namespace alime {

struct ForestConfig {
    std::size_t n_trees = 100;
    /// 0 selects ceil(sqrt(d)).
    std::size_t max_features = 0;
    std::size_t min_samples_leaf = 1;
    bool bootstrap = true;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

/// CART classification tree stored as a flat node array; node 0 is the root.
class DecisionTree {
public:
    struct Split {
        std::size_t feature;
        double threshold;  // go left when x[feature] <= threshold
        std::size_t left, right;
    };
    struct Leaf {
        std::vector<double> counts;
    };
    using Node = std::variant<Split, Leaf>;

    DecisionTree() = default;
    explicit DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

    /// Normalized class frequencies at the leaf reached by x.
    std::vector<double> leaf_distribution(std::span<const double> x) const;
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::size_t depth() const;

private:
    std::vector<Node> nodes_;
};

/// Grows one tree on rows `sample` (with repetition allowed) of X.
/// Splits minimize weighted Gini impurity over `max_features` randomly drawn
/// features; thresholds are midpoints between consecutive distinct values and
/// ties go to the lowest feature index, then the lowest threshold. A node is
/// split whenever it is impure and a split leaving min_samples_leaf on each
/// side exists, even if impurity does not drop.
DecisionTree grow_tree(const Matrix& X, std::span<const int> y, std::size_t n_classes,
                       std::span<const std::size_t> sample, std::size_t max_features,
                       std::size_t min_samples_leaf, std::uint64_t seed);

class Forest final : public BlackBox {
public:
    Forest(std::vector<DecisionTree> trees, std::size_t n_features, std::size_t n_classes);

    std::size_t n_classes() const override { return n_classes_; }
    InputKind input_kind() const override { return InputKind::point2d; }
    Matrix predict_points(const Matrix& points) override;

    /// Mean of the trees' leaf distributions.
    std::vector<double> predict_proba(std::span<const double> x) const;
    int predict(std::span<const double> x) const;

    std::size_t n_features() const noexcept { return n_features_; }
    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

    std::string to_json() const;
    static Forest from_json(const std::string& text);

private:
    std::vector<DecisionTree> trees_;
    std::size_t n_features_;
    std::size_t n_classes_;
};

/// Labels must be in 0..C-1 with at least two distinct classes present.
Forest train_forest(const Matrix& X, std::span<const int> y, const ForestConfig& cfg);

}  // namespace alime
