#include "dysarthria/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dysarthria/error.hpp"

namespace dysarthria {

std::string_view to_string(Group g) noexcept {
  switch (g) {
    case Group::Healthy: return "healthy";
    case Group::Dysarthric: return "dys";
    case Group::Mild: return "mild";
    case Group::Moderate: return "moderate";
    case Group::Severe: return "severe";
  }
  return "?";
}

namespace {

bool in_group(Severity s, Group g) {
  switch (g) {
    case Group::Healthy: return s == Severity::Healthy;
    case Group::Dysarthric: return s != Severity::Healthy;
    case Group::Mild: return s == Severity::Mild;
    case Group::Moderate: return s == Severity::Moderate;
    case Group::Severe: return s == Severity::Severe;
  }
  return false;
}

std::string number(double v) { return fmt::format("{}", v); }

}  // namespace

GroupMeans group_means(const FeatureMatrix& matrix) {
  GroupMeans table;
  for (std::size_t g = 0; g < kGroups.size(); ++g) {
    std::array<std::vector<double>, kFeatureCount> values;
    for (const auto& row : matrix.rows) {
      if (!in_group(row.severity, kGroups[g])) continue;
      ++table.rows[g];
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (row.values[f]) values[f].push_back(*row.values[f]);
      }
    }
    if (table.rows[g] == 0) {
      table.warnings.push_back(fmt::format("group '{}' has no utterances", to_string(kGroups[g])));
      continue;
    }
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      if (values[f].empty()) continue;
      // Summing in sorted order makes the mean independent of row order.
      std::sort(values[f].begin(), values[f].end());
      double sum = 0.0;
      for (double v : values[f]) sum += v;
      table.means[f][g] = sum / static_cast<double>(values[f].size());
    }
  }
  return table;
}

std::string to_csv(const GroupMeans& table) {
  std::vector<std::size_t> shown;
  for (std::size_t g = 0; g < kGroups.size(); ++g) {
    if (table.rows[g] > 0) shown.push_back(g);
  }
  std::string out = "measurement,label,dimension";
  for (auto g : shown) out += fmt::format(",{}", to_string(kGroups[g]));
  out += '\n';
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    out += fmt::format("{},{},{}", kFeatures[f].name, kFeatures[f].label, to_string(kFeatures[f].dimension));
    for (auto g : shown) {
      const auto& v = table.means[f][g];
      out += ',';
      out += v ? number(*v) : std::string("NA");
    }
    out += '\n';
  }
  return out;
}

double chi_square_sf(double x, int df) {
  if (df < 1) throw Error(ErrorCode::InvalidArgument, "chi-square needs df >= 1");
  if (!(x > 0.0)) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

KWResult kruskal_wallis(const std::vector<std::vector<double>>& groups, std::string measurement) {
  if (groups.size() < 2) throw Error(ErrorCode::InvalidArgument, "Kruskal-Wallis needs at least two groups");
  struct Obs {
    double value;
    std::size_t group;
  };
  std::vector<Obs> pooled;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw Error(ErrorCode::EmptyGroup, "group " + std::to_string(g) + " is empty");
    for (double v : groups[g]) pooled.push_back({v, g});
  }
  std::sort(pooled.begin(), pooled.end(), [](const Obs& a, const Obs& b) { return a.value < b.value; });

  const auto n = static_cast<double>(pooled.size());
  std::vector<double> rank_sum(groups.size(), 0.0);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].value == pooled[i].value) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) rank_sum[pooled[k].group] += mid_rank;
    const auto t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  KWResult r;
  r.measurement = std::move(measurement);
  r.df = static_cast<int>(groups.size()) - 1;
  const double correction = 1.0 - tie_term / (n * n * n - n);
  if (correction <= 0.0) return r;
  double s = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) s += rank_sum[g] * rank_sum[g] / static_cast<double>(groups[g].size());
  r.h = std::max(0.0, (12.0 / (n * (n + 1.0)) * s - 3.0 * (n + 1.0)) / correction);
  r.p = chi_square_sf(r.h, r.df);
  r.significant = r.p < kSignificanceLevel;
  return r;
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Q = 1 - sqrt(2 pi)/lambda * sum exp(-(2j-1)^2 pi^2 / (8 lambda^2))
    const double w = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int j = 1; j <= 20; ++j) {
      const double odd = 2.0 * j - 1.0;
      sum += std::exp(-odd * odd * w);
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

double ks_statistic(std::span<const double> sorted) {
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = normal_cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return d;
}

KSResult ks_normality(std::span<const double> sample) {
  if (sample.size() < 3) throw Error(ErrorCode::InvalidArgument, "KS test needs at least three values");
  const auto n = static_cast<double>(sample.size());
  const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : sample) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0) || sd < 1e-12 * std::max(1.0, std::abs(mean))) {
    throw Error(ErrorCode::ZeroVariance, "sample has zero variance");
  }
  std::vector<double> z;
  z.reserve(sample.size());
  for (double v : sample) z.push_back((v - mean) / sd);
  std::sort(z.begin(), z.end());

  KSResult r;
  r.d = ks_statistic(z);
  const double root = std::sqrt(n);
  r.p = kolmogorov_sf((root + 0.12 + 0.11 / root) * r.d);
  r.normal = r.p >= kSignificanceLevel;
  return r;
}

SignificanceReport significance_tests(const FeatureMatrix& matrix) {
  SignificanceReport report;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    std::vector<std::vector<double>> groups;
    for (auto level : kSeverities) {
      std::vector<double> values;
      for (const auto& row : matrix.rows) {
        if (row.severity == level && row.values[f]) values.push_back(*row.values[f]);
      }
      if (!values.empty()) groups.push_back(std::move(values));
    }
    const std::string name(kFeatures[f].name);
    if (groups.size() < 2) {
      report.skipped.push_back({name, fmt::format("{} severity group(s) with values; at least 2 needed", groups.size())});
      continue;
    }
    report.results.push_back(kruskal_wallis(groups, name));
  }
  return report;
}

namespace {

nlohmann::ordered_json skipped_json(const std::vector<SkippedTest>& skipped) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : skipped) arr.push_back({{"measurement", s.measurement}, {"reason", s.reason}});
  return arr;
}

}  // namespace

std::string to_json(const SignificanceReport& report) {
  nlohmann::ordered_json doc;
  doc["alpha"] = kSignificanceLevel;
  auto results = nlohmann::ordered_json::array();
  for (const auto& r : report.results) {
    results.push_back({{"measurement", r.measurement}, {"H", r.h}, {"df", r.df}, {"p", r.p}, {"significant", r.significant}});
  }
  doc["results"] = results;
  doc["skipped"] = skipped_json(report.skipped);
  return doc.dump(2) + "\n";
}

NormalityReport normality_tests(const FeatureMatrix& matrix) {
  NormalityReport report;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    std::vector<double> values;
    for (const auto& row : matrix.rows) {
      if (row.values[f]) values.push_back(*row.values[f]);
    }
    const std::string name(kFeatures[f].name);
    try {
      report.results.push_back({name, values.size(), ks_normality(values)});
    } catch (const Error& e) {
      report.skipped.push_back({name, e.what()});
    }
  }
  return report;
}

std::string to_json(const NormalityReport& report) {
  nlohmann::ordered_json doc;
  doc["alpha"] = kSignificanceLevel;
  auto results = nlohmann::ordered_json::array();
  for (const auto& r : report.results) {
    results.push_back({{"measurement", r.measurement}, {"n", r.n}, {"D", r.ks.d}, {"p", r.ks.p}, {"normal", r.ks.normal}});
  }
  doc["results"] = results;
  doc["skipped"] = skipped_json(report.skipped);
  return doc.dump(2) + "\n";
}

}  // namespace dysarthria
