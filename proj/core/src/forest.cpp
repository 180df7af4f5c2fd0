#include "alime/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <nlohmann/json.hpp>

#include "alime/error.hpp"
#include "alime/parallel.hpp"
#include "alime/random.hpp"

namespace alime {

std::vector<double> DecisionTree::leaf_distribution(std::span<const double> x) const {
    std::size_t i = 0;
    for (;;) {
        const auto& node = nodes_[i];
        if (const auto* leaf = std::get_if<Leaf>(&node)) {
            std::vector<double> p = leaf->counts;
            const double total = std::accumulate(p.begin(), p.end(), 0.0);
            for (auto& v : p) v /= total;
            return p;
        }
        const auto& split = std::get<Split>(node);
        i = x[split.feature] <= split.threshold ? split.left : split.right;
    }
}

std::size_t DecisionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t best = 0;
    while (!stack.empty()) {
        const auto [i, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (const auto* s = std::get_if<Split>(&nodes_[i])) {
            stack.emplace_back(s->left, d + 1);
            stack.emplace_back(s->right, d + 1);
        }
    }
    return best;
}

namespace {

struct SplitChoice {
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, std::span<const int> y, std::size_t n_classes, std::size_t max_features,
                std::size_t min_leaf, std::uint64_t seed)
        : X_(X), y_(y), n_classes_(n_classes), max_features_(max_features), min_leaf_(min_leaf), rng_(seed) {}

    std::vector<DecisionTree::Node> build(std::vector<std::size_t> rows) {
        grow(std::move(rows));
        return std::move(nodes_);
    }

private:
    std::size_t grow(std::vector<std::size_t> rows) {
        std::vector<double> counts(n_classes_, 0.0);
        for (auto r : rows) counts[static_cast<std::size_t>(y_[r])] += 1.0;
        const std::size_t self = nodes_.size();
        nodes_.emplace_back(DecisionTree::Leaf{counts});

        const auto nonzero = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; });
        if (nonzero <= 1 || rows.size() < 2 * min_leaf_) return self;

        const auto d = static_cast<std::size_t>(X_.cols());
        std::vector<std::size_t> order(d);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = 0; i < max_features_; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, d - 1);
            std::swap(order[i], order[pick(rng_)]);
        }
        std::vector<std::size_t> drawn(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(max_features_));
        std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(max_features_), order.end());
        std::sort(drawn.begin(), drawn.end());
        std::sort(rest.begin(), rest.end());

        auto choice = best_split(rows, drawn);
        if (!choice) choice = best_split(rows, rest);
        if (!choice) return self;

        std::vector<std::size_t> left, right;
        for (auto r : rows) (X_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(choice->feature)) <= choice->threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const std::size_t l = grow(std::move(left));
        const std::size_t r = grow(std::move(right));
        nodes_[self] = DecisionTree::Split{choice->feature, choice->threshold, l, r};
        return self;
    }

    std::optional<SplitChoice> best_split(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& features) {
        std::optional<SplitChoice> best;
        const std::size_t n = rows.size();
        std::vector<std::pair<double, int>> vals(n);
        std::vector<double> left(n_classes_), right(n_classes_);
        for (auto f : features) {
            for (std::size_t i = 0; i < n; ++i)
                vals[i] = {X_(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(f)), y_[rows[i]]};
            std::sort(vals.begin(), vals.end());
            std::fill(left.begin(), left.end(), 0.0);
            std::fill(right.begin(), right.end(), 0.0);
            for (const auto& v : vals) right[static_cast<std::size_t>(v.second)] += 1.0;
            for (std::size_t i = 1; i < n; ++i) {
                const auto cls = static_cast<std::size_t>(vals[i - 1].second);
                left[cls] += 1.0;
                right[cls] -= 1.0;
                if (!(vals[i - 1].first < vals[i].first)) continue;
                if (i < min_leaf_ || n - i < min_leaf_) continue;
                const double score = impurity(left, static_cast<double>(i)) + impurity(right, static_cast<double>(n - i));
                if (!best || score < best->score) {
                    double thr = 0.5 * (vals[i - 1].first + vals[i].first);
                    if (!(thr < vals[i].first)) thr = vals[i - 1].first;
                    best = SplitChoice{f, thr, score};
                }
            }
        }
        return best;
    }

    /// n * Gini = n - sum_k c_k^2 / n.
    static double impurity(const std::vector<double>& counts, double n) {
        double sq = 0.0;
        for (double c : counts) sq += c * c;
        return n - sq / n;
    }

    const Matrix& X_;
    std::span<const int> y_;
    std::size_t n_classes_;
    std::size_t max_features_;
    std::size_t min_leaf_;
    Rng rng_;
    std::vector<DecisionTree::Node> nodes_;
};

}  // namespace

DecisionTree grow_tree(const Matrix& X, std::span<const int> y, std::size_t n_classes,
                       std::span<const std::size_t> sample, std::size_t max_features, std::size_t min_samples_leaf,
                       std::uint64_t seed) {
    if (max_features < 1 || max_features > static_cast<std::size_t>(X.cols()))
        throw ParameterError("max_features must lie in [1, d]");
    if (min_samples_leaf < 1) throw ParameterError("min_samples_leaf must be at least 1");
    if (sample.empty()) throw ParameterError("cannot grow a tree on an empty sample");
    TreeBuilder builder(X, y, n_classes, max_features, min_samples_leaf, seed);
    return DecisionTree(builder.build({sample.begin(), sample.end()}));
}

Forest::Forest(std::vector<DecisionTree> trees, std::size_t n_features, std::size_t n_classes)
    : trees_(std::move(trees)), n_features_(n_features), n_classes_(n_classes) {
    if (trees_.empty()) throw ParameterError("a forest needs at least one tree");
}

std::vector<double> Forest::predict_proba(std::span<const double> x) const {
    if (x.size() != n_features_)
        throw DimensionError("expected " + std::to_string(n_features_) + " features, got " + std::to_string(x.size()));
    std::vector<double> p(n_classes_, 0.0);
    for (const auto& t : trees_) {
        const auto leaf = t.leaf_distribution(x);
        for (std::size_t k = 0; k < n_classes_; ++k) p[k] += leaf[k];
    }
    for (auto& v : p) v /= static_cast<double>(trees_.size());
    return p;
}

int Forest::predict(std::span<const double> x) const {
    const auto p = predict_proba(x);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

Matrix Forest::predict_points(const Matrix& points) {
    Matrix out(points.rows(), static_cast<Eigen::Index>(n_classes_));
    std::vector<double> row(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index j = 0; j < points.cols(); ++j) row[static_cast<std::size_t>(j)] = points(i, j);
        const auto p = predict_proba(row);
        for (std::size_t k = 0; k < n_classes_; ++k) out(i, static_cast<Eigen::Index>(k)) = p[k];
    }
    return out;
}

namespace {

nlohmann::json node_to_json(const DecisionTree& tree, std::size_t i) {
    const auto& node = tree.nodes()[i];
    if (const auto* leaf = std::get_if<DecisionTree::Leaf>(&node)) return {{"counts", leaf->counts}};
    const auto& s = std::get<DecisionTree::Split>(node);
    return {{"feature", s.feature},
            {"threshold", s.threshold},
            {"left", node_to_json(tree, s.left)},
            {"right", node_to_json(tree, s.right)}};
}

std::size_t node_from_json(const nlohmann::json& j, std::vector<DecisionTree::Node>& nodes, std::size_t n_features,
                           std::size_t n_classes) {
    const std::size_t self = nodes.size();
    if (j.contains("counts")) {
        auto counts = j.at("counts").get<std::vector<double>>();
        if (counts.size() != n_classes || std::accumulate(counts.begin(), counts.end(), 0.0) <= 0.0)
            throw ParameterError("leaf counts must have one positive-sum entry per class");
        nodes.emplace_back(DecisionTree::Leaf{std::move(counts)});
        return self;
    }
    const auto feature = j.at("feature").get<std::size_t>();
    const auto threshold = j.at("threshold").get<double>();
    if (feature >= n_features || !std::isfinite(threshold)) throw ParameterError("invalid split node");
    nodes.emplace_back(DecisionTree::Leaf{});
    const std::size_t l = node_from_json(j.at("left"), nodes, n_features, n_classes);
    const std::size_t r = node_from_json(j.at("right"), nodes, n_features, n_classes);
    nodes[self] = DecisionTree::Split{feature, threshold, l, r};
    return self;
}

}  // namespace

std::string Forest::to_json() const {
    nlohmann::json j;
    j["n_features"] = n_features_;
    j["n_classes"] = n_classes_;
    auto& trees = j["trees"] = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(node_to_json(t, 0));
    return j.dump();
}

Forest Forest::from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        const auto n_features = j.at("n_features").get<std::size_t>();
        const auto n_classes = j.at("n_classes").get<std::size_t>();
        std::vector<DecisionTree> trees;
        for (const auto& t : j.at("trees")) {
            std::vector<DecisionTree::Node> nodes;
            node_from_json(t, nodes, n_features, n_classes);
            trees.emplace_back(std::move(nodes));
        }
        return Forest(std::move(trees), n_features, n_classes);
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("malformed forest document: ") + e.what());
    }
}

Forest train_forest(const Matrix& X, std::span<const int> y, const ForestConfig& cfg) {
    const auto n = static_cast<std::size_t>(X.rows());
    const auto d = static_cast<std::size_t>(X.cols());
    if (n < 2) throw ParameterError("a forest needs at least 2 training rows");
    if (y.size() != n) throw DimensionError("one label per training row is required");
    if (d == 0) throw ParameterError("training data has no features");
    if (!X.allFinite()) throw NumericError("training data contains non-finite values");
    if (cfg.n_trees < 1) throw ParameterError("n_trees must be at least 1");
    if (*std::min_element(y.begin(), y.end()) < 0) throw ParameterError("labels must be non-negative");
    const auto n_classes = static_cast<std::size_t>(*std::max_element(y.begin(), y.end())) + 1;
    if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y[0]; }))
        throw ParameterError("training labels contain a single class");
    const std::size_t max_features =
        cfg.max_features == 0 ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d)))) : cfg.max_features;
    if (max_features > d) throw ParameterError("max_features exceeds the feature count");

    std::vector<DecisionTree> trees(cfg.n_trees);
    parallel_for(cfg.n_trees, cfg.threads, [&](std::size_t t) {
        const std::uint64_t seed = derive_seed(cfg.seed, {t});
        std::vector<std::size_t> sample(n);
        if (cfg.bootstrap) {
            Rng rng(derive_seed(seed, {0}));
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (auto& s : sample) s = pick(rng);
        } else {
            std::iota(sample.begin(), sample.end(), 0);
        }
        trees[t] = grow_tree(X, y, n_classes, sample, max_features, cfg.min_samples_leaf, derive_seed(seed, {1}));
    });
    return Forest(std::move(trees), d, n_classes);
}

}  // namespace alime
