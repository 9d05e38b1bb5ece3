#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dysarthria/features.hpp"

namespace dysarthria {

/// Row-major sample matrix.
using Matrix = std::vector<std::vector<double>>;

// --- preprocessing -----------------------------------------------------------

struct ScalerParams {
  std::vector<double> mean;
  std::vector<double> scale;  ///< population std, 1 where the column is constant
};

/// Throws TooFewRows below two rows.
ScalerParams fit_scaler(const Matrix& train);
Matrix apply_scaler(const ScalerParams& params, const Matrix& rows);

/// Column means over present entries; a column with no present entry gets 0.
std::vector<double> fit_imputer(const std::vector<std::vector<std::optional<double>>>& rows);
Matrix apply_imputer(const std::vector<double>& fill, const std::vector<std::vector<std::optional<double>>>& rows);

// --- extremely randomized trees ---------------------------------------------

struct ForestOptions {
  int n_trees = 100;
  int max_features = 0;  ///< 0: floor(sqrt(n_features))
  int min_samples_split = 2;
  std::uint64_t seed = 42;
};

struct TreeNode {
  int feature = -1;  ///< -1 for a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> class_counts;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<double> importances;  ///< non-negative, sums to 1
  int n_classes = 0;
  std::uint64_t seed = 0;
};

/// Each tree sees every sample; at a node, candidate features are drawn
/// without replacement and each gets one threshold uniform between its node
/// minimum and maximum; the best Gini decrease wins. Labels are 0..k-1.
/// Throws SingleClass.
ForestModel fit_extra_trees(const Matrix& x, const std::vector<int>& y, const ForestOptions& options = {});
int predict(const ForestModel& model, std::span<const double> row);

/// Indices whose importance exceeds the mean importance; all indices when none does.
std::vector<std::size_t> select_features(const ForestModel& model);
std::vector<std::string> select_features(const ForestModel& model, const std::vector<std::string>& names);

// --- support vector machine --------------------------------------------------

inline constexpr double kSmoTolerance = 1e-3;

struct DualSolution {
  std::vector<double> alpha;
  double rho = 0.0;             ///< decision(x) = sum alpha_i y_i K(x_i, x) - rho
  double dual_objective = 0.0;  ///< sum alpha - 1/2 alpha' Q alpha
  std::size_t iterations = 0;
};

/// Two-class soft-margin dual by SMO with second-order working-set selection.
/// `kernel` is the full n x n Gram matrix, `y` holds +1/-1. Throws
/// NoConvergence when `max_iterations` pass before the KKT gap drops below `tolerance`.
DualSolution solve_svm_dual(const Matrix& kernel, const std::vector<int>& y, double c,
                            double tolerance = kSmoTolerance, std::size_t max_iterations = 0);

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

struct BinarySvm {
  int positive = 0;  ///< class voted for by a positive decision value
  int negative = 0;
  std::vector<std::size_t> support;  ///< indices into SvmModel::vectors
  std::vector<double> coef;          ///< alpha_i * y_i
  double rho = 0.0;
};

struct SvmModel {
  double c = 1.0;
  double gamma = 1.0;
  std::vector<int> classes;  ///< sorted labels seen in training
  Matrix vectors;            ///< training rows referenced by the pairs
  std::vector<BinarySvm> pairs;  ///< (classes[i], classes[j]) for i < j
};

/// One-vs-one RBF machines. Throws SingleClass or NoConvergence.
SvmModel train_svm(const Matrix& x, const std::vector<int>& y, double c, double gamma);
/// Same, from a precomputed Gram matrix over the rows of `x`.
SvmModel train_svm(const Matrix& x, const std::vector<int>& y, double c, double gamma, const Matrix& kernel);
/// Pairwise vote; ties go to the lowest class.
int predict(const SvmModel& model, std::span<const double> row);

// --- cross-validation ------------------------------------------------------

struct Grid {
  std::vector<double> c;
  std::vector<double> gamma;
};

/// 10^-4 .. 10^4 in decades on both axes.
Grid default_grid();
/// `C-list:gamma-list`, each list either comma-separated numbers or `lo..hi`
/// for the decades between two powers of ten. Throws InvalidArgument.
Grid parse_grid(std::string_view spec);

enum class SelectionMode { None, InsideCv, OutsideCv };

struct CvOptions {
  Grid grid = default_grid();
  ForestOptions forest;
  SelectionMode selection = SelectionMode::InsideCv;
  std::vector<std::size_t> features;  ///< columns considered; empty: all 39
  int jobs = 1;
};

struct Prediction {
  std::string utterance_id;
  Severity truth = Severity::Healthy;
  Severity predicted = Severity::Healthy;
};

struct FoldResult {
  std::string held_out_speaker;
  std::vector<std::string> train_speakers;
  double c = 0.0;
  double gamma = 0.0;
  std::optional<double> inner_accuracy;  ///< empty when too few training speakers to tune
  std::vector<std::size_t> features;
  std::vector<double> importances;  ///< over all candidate columns, selection runs only
  std::vector<Prediction> predictions;
};

struct CvRun {
  std::vector<FoldResult> folds;  ///< sorted by held-out speaker
  double accuracy = 0.0;          ///< percent of utterances
};

/// Outer leave-one-speaker-out loop. Inside each fold the imputer, scaler,
/// (optionally) forest and SVM are fitted on the training speakers only and
/// (C, gamma) is picked by an inner leave-one-speaker-out loop.
/// `fixed_features` overrides in-fold selection. Throws SingleSpeaker.
CvRun grid_search_losocv(const FeatureMatrix& matrix, const CvOptions& options, bool select_in_fold,
                         const std::optional<std::vector<std::size_t>>& fixed_features = std::nullopt);

/// Two-decimal relative change in percent; throws ZeroBaseline unless all > 0.
double relative_increase(double all, double selected);

struct CvReport {
  std::uint64_t seed = 0;
  Grid grid;
  int trees = 0;
  SelectionMode selection = SelectionMode::InsideCv;
  std::size_t n_utterances = 0;
  std::vector<std::string> speakers;
  CvRun all;
  std::optional<CvRun> selected;
  std::vector<std::string> selected_features;  ///< chosen in more than half of the folds
  std::optional<double> relative_increase;
  std::vector<double> importances;  ///< per feature (39 entries), averaged over folds
};

/// Runs the all-feature and the selected-feature LOSOCV and assembles the report.
CvReport cross_validate(const FeatureMatrix& matrix, const CvOptions& options);
std::string to_json(const CvReport& report);

/// `feature,label,dimension,importance` rows in table order.
std::string importance_csv(const std::vector<double>& importances);
/// Per-feature bars coloured by dimension beside per-dimension totals.
std::string importance_svg(const std::vector<double>& importances);

}  // namespace dysarthria
