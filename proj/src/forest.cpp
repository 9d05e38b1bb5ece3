#include <algorithm>
#include <cmath>
#include <numeric>

#include "dysarthria/error.hpp"
#include "dysarthria/ml.hpp"
#include "dysarthria/random.hpp"

namespace dysarthria {

ScalerParams fit_scaler(const Matrix& train) {
  if (train.size() < 2) throw Error(ErrorCode::TooFewRows, "scaler needs at least two rows");
  const std::size_t d = train.front().size();
  const auto n = static_cast<double>(train.size());
  ScalerParams p{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (const auto& row : train) sum += row[j];
    p.mean[j] = sum / n;
    double ss = 0.0;
    for (const auto& row : train) ss += (row[j] - p.mean[j]) * (row[j] - p.mean[j]);
    const double sd = std::sqrt(ss / n);
    p.scale[j] = sd > 1e-12 * std::max(1.0, std::abs(p.mean[j])) ? sd : 1.0;
  }
  return p;
}

Matrix apply_scaler(const ScalerParams& params, const Matrix& rows) {
  Matrix out = rows;
  for (auto& row : out) {
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - params.mean[j]) / params.scale[j];
  }
  return out;
}

std::vector<double> fit_imputer(const std::vector<std::vector<std::optional<double>>>& rows) {
  if (rows.empty()) return {};
  const std::size_t d = rows.front().size();
  std::vector<double> fill(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : rows) {
      if (row[j]) {
        sum += *row[j];
        ++n;
      }
    }
    if (n > 0) fill[j] = sum / static_cast<double>(n);
  }
  return fill;
}

Matrix apply_imputer(const std::vector<double>& fill, const std::vector<std::vector<std::optional<double>>>& rows) {
  Matrix out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    std::vector<double> r(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) r[j] = row[j].value_or(fill[j]);
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

double gini(const std::vector<double>& counts, double total) {
  if (total <= 0.0) return 0.0;
  double s = 0.0;
  for (double c : counts) s += (c / total) * (c / total);
  return 1.0 - s;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const std::vector<int>& y, int n_classes, int max_features, int min_split, Rng& rng)
      : x_(x), y_(y), n_classes_(n_classes), max_features_(max_features), min_split_(min_split), rng_(rng),
        importance_(x.front().size(), 0.0) {}

  DecisionTree build() {
    std::vector<std::size_t> all(x_.size());
    std::iota(all.begin(), all.end(), 0);
    grow(all);
    return std::move(tree_);
  }

  const std::vector<double>& importance() const { return importance_; }

 private:
  int grow(const std::vector<std::size_t>& idx) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::vector<double> counts(static_cast<std::size_t>(n_classes_), 0.0);
    for (auto i : idx) counts[static_cast<std::size_t>(y_[i])] += 1.0;
    const auto n = static_cast<double>(idx.size());
    const double impurity = gini(counts, n);
    tree_.nodes[static_cast<std::size_t>(id)].class_counts = counts;
    if (static_cast<int>(idx.size()) < min_split_ || impurity <= 0.0) return id;

    const std::size_t d = x_.front().size();
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_child_impurity = impurity;
    int drawn = 0;
    for (std::size_t k = 0; k < d && drawn < max_features_; ++k) {
      std::swap(order[k], order[k + rng_.index(d - k)]);
      const std::size_t f = order[k];
      double lo = x_[idx.front()][f];
      double hi = lo;
      for (auto i : idx) {
        lo = std::min(lo, x_[i][f]);
        hi = std::max(hi, x_[i][f]);
      }
      if (!(hi > lo)) continue;  // constant here; does not count as drawn
      ++drawn;
      double threshold = lo + rng_.uniform() * (hi - lo);
      if (threshold <= lo) threshold = std::nextafter(lo, hi);
      std::vector<double> left(static_cast<std::size_t>(n_classes_), 0.0);
      double n_left = 0.0;
      for (auto i : idx) {
        if (x_[i][f] <= threshold) {
          left[static_cast<std::size_t>(y_[i])] += 1.0;
          n_left += 1.0;
        }
      }
      std::vector<double> right(counts);
      for (std::size_t c = 0; c < right.size(); ++c) right[c] -= left[c];
      const double n_right = n - n_left;
      if (n_left == 0.0 || n_right == 0.0) continue;
      const double child = (n_left * gini(left, n_left) + n_right * gini(right, n_right)) / n;
      if (best_feature < 0 || child < best_child_impurity) {
        best_feature = static_cast<int>(f);
        best_threshold = threshold;
        best_child_impurity = child;
      }
    }
    if (best_feature < 0) return id;

    importance_[static_cast<std::size_t>(best_feature)] +=
        n / static_cast<double>(x_.size()) * (impurity - best_child_impurity);
    std::vector<std::size_t> l, r;
    for (auto i : idx) (x_[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? l : r).push_back(i);
    const int left_id = grow(l);
    const int right_id = grow(r);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left_id;
    node.right = right_id;
    return id;
  }

  const Matrix& x_;
  const std::vector<int>& y_;
  int n_classes_;
  int max_features_;
  int min_split_;
  Rng& rng_;
  DecisionTree tree_;
  std::vector<double> importance_;
};

}  // namespace

ForestModel fit_extra_trees(const Matrix& x, const std::vector<int>& y, const ForestOptions& options) {
  if (x.empty() || x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "forest needs matching rows and labels");
  const std::size_t d = x.front().size();
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "forest needs at least one feature");
  const int n_classes = *std::max_element(y.begin(), y.end()) + 1;
  if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); })) {
    throw Error(ErrorCode::SingleClass, "forest needs at least two classes");
  }
  const int max_features =
      options.max_features > 0 ? options.max_features : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(d))));

  ForestModel model;
  model.n_classes = n_classes;
  model.seed = options.seed;
  model.importances.assign(d, 0.0);
  Rng rng(options.seed);
  for (int t = 0; t < options.n_trees; ++t) {
    TreeBuilder builder(x, y, n_classes, max_features, options.min_samples_split, rng);
    model.trees.push_back(builder.build());
    const auto& imp = builder.importance();
    const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (total > 0.0) {
      for (std::size_t j = 0; j < d; ++j) model.importances[j] += imp[j] / total;
    }
  }
  const double total = std::accumulate(model.importances.begin(), model.importances.end(), 0.0);
  for (auto& v : model.importances) v = total > 0.0 ? v / total : 1.0 / static_cast<double>(d);
  return model;
}

int predict(const ForestModel& model, std::span<const double> row) {
  std::vector<double> votes(static_cast<std::size_t>(model.n_classes), 0.0);
  for (const auto& tree : model.trees) {
    int node = 0;
    while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
      const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
      node = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    const auto& counts = tree.nodes[static_cast<std::size_t>(node)].class_counts;
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    for (std::size_t c = 0; c < counts.size(); ++c) votes[c] += counts[c] / total;
  }
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::vector<std::size_t> select_features(const ForestModel& model) {
  const auto& imp = model.importances;
  const double mean = std::accumulate(imp.begin(), imp.end(), 0.0) / static_cast<double>(imp.size());
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < imp.size(); ++j) {
    if (imp[j] - mean > 1e-12) keep.push_back(j);
  }
  if (keep.empty()) {
    keep.resize(imp.size());
    std::iota(keep.begin(), keep.end(), 0);
  }
  return keep;
}

std::vector<std::string> select_features(const ForestModel& model, const std::vector<std::string>& names) {
  if (names.size() != model.importances.size()) {
    throw Error(ErrorCode::InvalidArgument, "feature names do not match the model");
  }
  std::vector<std::string> out;
  for (auto j : select_features(model)) out.push_back(names[j]);
  return out;
}

}  // namespace dysarthria
