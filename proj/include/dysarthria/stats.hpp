#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dysarthria/features.hpp"

namespace dysarthria {

/// Columns of the group-means table; `Dysarthric` pools mild, moderate and severe.
enum class Group { Healthy, Dysarthric, Mild, Moderate, Severe };

inline constexpr std::array<Group, 5> kGroups{Group::Healthy, Group::Dysarthric, Group::Mild, Group::Moderate,
                                              Group::Severe};

std::string_view to_string(Group g) noexcept;

struct GroupMeans {
  /// means[f][g]: mean of feature f over the group's non-absent entries.
  std::array<std::array<std::optional<double>, kGroups.size()>, kFeatureCount> means{};
  std::array<std::size_t, kGroups.size()> rows{};  ///< utterances per group
  std::vector<std::string> warnings;                ///< one per empty group
};

GroupMeans group_means(const FeatureMatrix& matrix);
/// `measurement,label,dimension,healthy,dys,mild,moderate,severe`; empty groups are left out.
std::string to_csv(const GroupMeans& table);

struct KWResult {
  std::string measurement;
  double h = 0.0;
  int df = 0;
  double p = 1.0;
  bool significant = false;  ///< p < 0.05
};

inline constexpr double kSignificanceLevel = 0.05;

/// Upper tail of the chi-square distribution.
double chi_square_sf(double x, int df);

/// Rank test over k >= 2 non-empty groups with mid-ranks and tie correction.
/// When every value is equal the statistic is 0 and p is 1.
KWResult kruskal_wallis(const std::vector<std::vector<double>>& groups, std::string measurement = {});

/// Kolmogorov distribution upper tail Q(lambda) = 2 sum (-1)^(j-1) exp(-2 j^2 lambda^2).
double kolmogorov_sf(double lambda);

struct KSResult {
  double d = 0.0;
  double p = 1.0;
  bool normal = true;  ///< p >= 0.05
};

/// One-sample test of the standardized sample (population std) against the
/// standard normal; asymptotic p with the small-sample scaling of lambda.
/// Throws InvalidArgument below 3 values and ZeroVariance for a constant sample.
KSResult ks_normality(std::span<const double> sample);
/// Largest distance between the empirical CDF of `sorted` and Phi.
double ks_statistic(std::span<const double> sorted);

struct SkippedTest {
  std::string measurement;
  std::string reason;
};

struct SignificanceReport {
  std::vector<KWResult> results;
  std::vector<SkippedTest> skipped;
};

/// Kruskal-Wallis per measurement across the severity levels present.
SignificanceReport significance_tests(const FeatureMatrix& matrix);
std::string to_json(const SignificanceReport& report);

struct NormalityEntry {
  std::string measurement;
  std::size_t n = 0;
  KSResult ks;
};

struct NormalityReport {
  std::vector<NormalityEntry> results;
  std::vector<SkippedTest> skipped;
};

/// KS normality per measurement over all utterances.
NormalityReport normality_tests(const FeatureMatrix& matrix);
std::string to_json(const NormalityReport& report);

}  // namespace dysarthria
