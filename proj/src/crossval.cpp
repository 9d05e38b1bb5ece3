#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dysarthria/error.hpp"
#include "dysarthria/ml.hpp"
#include "dysarthria/random.hpp"

namespace dysarthria {

Grid default_grid() {
  Grid g;
  for (int e = -4; e <= 4; ++e) {
    g.c.push_back(std::pow(10.0, e));
    g.gamma.push_back(std::pow(10.0, e));
  }
  return g;
}

namespace {

double parse_number(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgument, "grid value '" + std::string(s) + "' is not a positive number");
  }
  return v;
}

std::vector<double> parse_axis(std::string_view s) {
  std::vector<double> out;
  if (auto dots = s.find(".."); dots != std::string_view::npos) {
    const double lo = parse_number(s.substr(0, dots));
    const double hi = parse_number(s.substr(dots + 2));
    const double elo = std::log10(lo);
    const double ehi = std::log10(hi);
    if (std::abs(elo - std::round(elo)) > 1e-9 || std::abs(ehi - std::round(ehi)) > 1e-9 || lo > hi) {
      throw Error(ErrorCode::InvalidArgument, "range '" + std::string(s) + "' must run between powers of ten");
    }
    for (auto e = static_cast<int>(std::round(elo)); e <= static_cast<int>(std::round(ehi)); ++e) {
      out.push_back(std::pow(10.0, e));
    }
    return out;
  }
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    out.push_back(parse_number(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

Grid parse_grid(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, "grid must look like C-list:gamma-list");
  return {parse_axis(spec.substr(0, colon)), parse_axis(spec.substr(colon + 1))};
}

double relative_increase(double all, double selected) {
  if (!(all > 0.0)) throw Error(ErrorCode::ZeroBaseline, "baseline accuracy must be positive");
  return std::round(100.0 * (selected - all) / all * 100.0) / 100.0;
}

namespace {

using Raw = std::vector<std::vector<std::optional<double>>>;

Raw gather(const FeatureMatrix& m, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  Raw out;
  out.reserve(rows.size());
  for (auto r : rows) {
    std::vector<std::optional<double>> v;
    v.reserve(cols.size());
    for (auto c : cols) v.push_back(m.rows[r].values[c]);
    out.push_back(std::move(v));
  }
  return out;
}

/// Imputer and scaler fitted on `train`, applied to both.
std::pair<Matrix, Matrix> prepare(const Raw& train, const Raw& test) {
  const auto fill = fit_imputer(train);
  const Matrix x_train = apply_imputer(fill, train);
  const auto scaler = fit_scaler(x_train);
  return {apply_scaler(scaler, x_train), apply_scaler(scaler, apply_imputer(fill, test))};
}

Matrix squared_distances(const Matrix& a) {
  Matrix d(a.size(), std::vector<double>(a.size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a[i].size(); ++k) s += (a[i][k] - a[j][k]) * (a[i][k] - a[j][k]);
      d[i][j] = d[j][i] = s;
    }
  }
  return d;
}

bool single_class(const std::vector<int>& y) {
  return std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); });
}

struct GridScore {
  std::size_t correct = 0;
  bool failed = false;
};

struct FoldContext {
  const FeatureMatrix& matrix;
  const CvOptions& options;
  std::vector<std::string> speakers;
  std::vector<int> labels;
};

/// Utterance-level accuracy of every grid point under leave-one-speaker-out
/// over `rows` (indices into the matrix), using columns `cols`.
std::vector<GridScore> inner_scores(const FoldContext& ctx, const std::vector<std::size_t>& rows,
                                    const std::vector<std::size_t>& cols) {
  const auto& grid = ctx.options.grid;
  std::vector<GridScore> scores(grid.c.size() * grid.gamma.size());
  std::set<std::string> inner_speakers;
  for (auto r : rows) inner_speakers.insert(ctx.matrix.rows[r].speaker_id);

  for (const auto& held : inner_speakers) {
    std::vector<std::size_t> tr, va;
    for (auto r : rows) (ctx.matrix.rows[r].speaker_id == held ? va : tr).push_back(r);
    std::vector<int> y_tr;
    for (auto r : tr) y_tr.push_back(ctx.labels[r]);
    if (single_class(y_tr)) {
      std::size_t correct = 0;
      for (auto r : va) correct += ctx.labels[r] == y_tr.front() ? 1 : 0;
      for (auto& s : scores) s.correct += correct;
      continue;
    }
    auto [x_tr, x_va] = prepare(gather(ctx.matrix, tr, cols), gather(ctx.matrix, va, cols));
    Matrix joined = x_tr;
    joined.insert(joined.end(), x_va.begin(), x_va.end());
    const Matrix d2 = squared_distances(joined);

    for (std::size_t gi = 0; gi < grid.gamma.size(); ++gi) {
      const double gamma = grid.gamma[gi];
      Matrix k_tr(tr.size(), std::vector<double>(tr.size()));
      for (std::size_t i = 0; i < tr.size(); ++i) {
        for (std::size_t j = 0; j < tr.size(); ++j) k_tr[i][j] = std::exp(-gamma * d2[i][j]);
      }
      for (std::size_t ci = 0; ci < grid.c.size(); ++ci) {
        auto& score = scores[ci * grid.gamma.size() + gi];
        if (score.failed) continue;
        try {
          const auto model = train_svm(x_tr, y_tr, grid.c[ci], gamma, k_tr);
          for (std::size_t v = 0; v < va.size(); ++v) {
            score.correct += predict(model, x_va[v]) == ctx.labels[va[v]] ? 1 : 0;
          }
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoConvergence) throw;
          score.failed = true;
        }
      }
    }
  }
  return scores;
}

FoldResult run_fold(const FoldContext& ctx, std::size_t fold, const std::vector<std::size_t>& candidates,
                    bool select, const std::optional<std::vector<std::size_t>>& fixed) {
  const auto& held = ctx.speakers[fold];
  FoldResult result;
  result.held_out_speaker = held;
  for (const auto& s : ctx.speakers) {
    if (s != held) result.train_speakers.push_back(s);
  }
  std::vector<std::size_t> train, test;
  for (std::size_t r = 0; r < ctx.matrix.rows.size(); ++r) {
    (ctx.matrix.rows[r].speaker_id == held ? test : train).push_back(r);
  }
  std::vector<int> y_train;
  for (auto r : train) y_train.push_back(ctx.labels[r]);

  auto record = [&](auto&& predict_row) {
    for (std::size_t t = 0; t < test.size(); ++t) {
      const auto& row = ctx.matrix.rows[test[t]];
      result.predictions.push_back({row.utterance_id, row.severity,
                                    kSeverities[static_cast<std::size_t>(predict_row(t))]});
    }
  };

  if (single_class(y_train)) {
    result.features = fixed ? *fixed : candidates;
    record([&](std::size_t) { return y_train.front(); });
    return result;
  }

  std::vector<std::size_t> cols = candidates;
  if (fixed) {
    cols = *fixed;
  } else if (select) {
    auto [x_train, unused] = prepare(gather(ctx.matrix, train, candidates), {});
    ForestOptions forest = ctx.options.forest;
    forest.seed = derive_seed(ctx.options.forest.seed, fold);
    const auto model = fit_extra_trees(x_train, y_train, forest);
    result.importances.assign(kFeatureCount, 0.0);
    for (std::size_t j = 0; j < candidates.size(); ++j) result.importances[candidates[j]] = model.importances[j];
    cols.clear();
    for (auto j : select_features(model)) cols.push_back(candidates[j]);
  }
  result.features = cols;

  auto [x_train, x_test] = prepare(gather(ctx.matrix, train, cols), gather(ctx.matrix, test, cols));
  const auto& grid = ctx.options.grid;
  std::vector<std::pair<double, double>> order;  // (C, gamma), best first
  std::set<std::string> train_speakers(result.train_speakers.begin(), result.train_speakers.end());
  if (train_speakers.size() >= 2) {
    const auto scores = inner_scores(ctx, train, cols);
    std::vector<std::size_t> idx;
    for (std::size_t g = 0; g < scores.size(); ++g) {
      if (!scores[g].failed) idx.push_back(g);
    }
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a].correct > scores[b].correct; });
    for (auto g : idx) order.emplace_back(grid.c[g / grid.gamma.size()], grid.gamma[g % grid.gamma.size()]);
    if (!idx.empty()) {
      result.inner_accuracy = 100.0 * static_cast<double>(scores[idx.front()].correct) / static_cast<double>(train.size());
    }
  } else {
    order.emplace_back(1.0, 1.0 / static_cast<double>(cols.size()));
  }

  for (const auto& [c, gamma] : order) {
    try {
      const auto model = train_svm(x_train, y_train, c, gamma);
      result.c = c;
      result.gamma = gamma;
      record([&](std::size_t t) { return predict(model, x_test[t]); });
      return result;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoConvergence) throw;
    }
  }
  throw Error(ErrorCode::NoConvergence, "no grid point converged for fold " + held);
}

std::vector<std::size_t> candidate_columns(const CvOptions& options) {
  if (!options.features.empty()) return options.features;
  std::vector<std::size_t> all(kFeatureCount);
  std::iota(all.begin(), all.end(), 0);
  return all;
}

}  // namespace

CvRun grid_search_losocv(const FeatureMatrix& matrix, const CvOptions& options, bool select_in_fold,
                         const std::optional<std::vector<std::size_t>>& fixed_features) {
  FoldContext ctx{matrix, options, matrix.speakers(), {}};
  if (ctx.speakers.size() < 2) throw Error(ErrorCode::SingleSpeaker, "cross-validation needs at least two speakers");
  if (options.grid.c.empty() || options.grid.gamma.empty()) throw Error(ErrorCode::InvalidArgument, "empty grid");
  for (const auto& row : matrix.rows) ctx.labels.push_back(severity_index(row.severity));
  if (single_class(ctx.labels)) throw Error(ErrorCode::SingleClass, "classification needs at least two severities");
  const auto candidates = candidate_columns(options);

  CvRun run;
  run.folds.resize(ctx.speakers.size());
  std::vector<std::exception_ptr> errors(ctx.speakers.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t f = next++; f < ctx.speakers.size(); f = next++) {
      try {
        run.folds[f] = run_fold(ctx, f, candidates, select_in_fold, fixed_features);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, options.jobs)), ctx.speakers.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& fold : run.folds) {
    for (const auto& p : fold.predictions) {
      correct += p.truth == p.predicted ? 1 : 0;
      ++total;
    }
  }
  run.accuracy = total > 0 ? 100.0 * static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  return run;
}

CvReport cross_validate(const FeatureMatrix& matrix, const CvOptions& options) {
  CvReport report;
  report.seed = options.forest.seed;
  report.grid = options.grid;
  report.trees = options.forest.n_trees;
  report.selection = options.selection;
  report.n_utterances = matrix.size();
  report.speakers = matrix.speakers();
  report.importances.assign(kFeatureCount, 0.0);

  report.all = grid_search_losocv(matrix, options, false);
  const auto candidates = candidate_columns(options);
  if (options.selection == SelectionMode::InsideCv) {
    report.selected = grid_search_losocv(matrix, options, true);
    std::vector<int> chosen(kFeatureCount, 0);
    for (const auto& fold : report.selected->folds) {
      for (auto c : fold.features) ++chosen[c];
      for (std::size_t j = 0; j < fold.importances.size(); ++j) report.importances[j] += fold.importances[j];
    }
    const auto folds = report.selected->folds.size();
    for (auto& v : report.importances) v /= static_cast<double>(folds);
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      if (2 * static_cast<std::size_t>(chosen[j]) > folds) report.selected_features.emplace_back(kFeatures[j].name);
    }
  } else if (options.selection == SelectionMode::OutsideCv) {
    std::vector<std::size_t> rows(matrix.size());
    std::iota(rows.begin(), rows.end(), 0);
    auto [x, unused] = prepare(gather(matrix, rows, candidates), {});
    std::vector<int> y;
    for (const auto& row : matrix.rows) y.push_back(severity_index(row.severity));
    const auto model = fit_extra_trees(x, y, options.forest);
    std::vector<std::size_t> fixed;
    for (auto j : select_features(model)) fixed.push_back(candidates[j]);
    for (std::size_t j = 0; j < candidates.size(); ++j) report.importances[candidates[j]] = model.importances[j];
    for (auto c : fixed) report.selected_features.emplace_back(kFeatures[c].name);
    report.selected = grid_search_losocv(matrix, options, false, fixed);
  }
  if (report.selected && report.all.accuracy > 0.0) {
    report.relative_increase = relative_increase(report.all.accuracy, report.selected->accuracy);
  }
  return report;
}

namespace {

std::string_view to_string(SelectionMode m) {
  switch (m) {
    case SelectionMode::None: return "none";
    case SelectionMode::InsideCv: return "inside-cv";
    case SelectionMode::OutsideCv: return "outside-cv";
  }
  return "?";
}

nlohmann::ordered_json names_of(const std::vector<std::size_t>& cols) {
  auto arr = nlohmann::ordered_json::array();
  for (auto c : cols) arr.push_back(kFeatures[c].name);
  return arr;
}

nlohmann::ordered_json run_json(const CvRun& run) {
  nlohmann::ordered_json j;
  j["accuracy"] = run.accuracy;
  auto folds = nlohmann::ordered_json::array();
  for (const auto& f : run.folds) {
    nlohmann::ordered_json fj;
    fj["held_out_speaker"] = f.held_out_speaker;
    fj["train_speakers"] = f.train_speakers;
    fj["C"] = f.c;
    fj["gamma"] = f.gamma;
    fj["inner_accuracy"] = f.inner_accuracy ? nlohmann::ordered_json(*f.inner_accuracy) : nlohmann::ordered_json();
    fj["features"] = names_of(f.features);
    auto preds = nlohmann::ordered_json::array();
    for (const auto& p : f.predictions) {
      preds.push_back({{"utt_id", p.utterance_id}, {"true", to_string(p.truth)}, {"predicted", to_string(p.predicted)}});
    }
    fj["predictions"] = preds;
    folds.push_back(fj);
  }
  j["folds"] = folds;
  return j;
}

}  // namespace

std::string to_json(const CvReport& report) {
  nlohmann::ordered_json doc;
  doc["seed"] = report.seed;
  doc["grid"] = {{"C", report.grid.c}, {"gamma", report.grid.gamma}};
  doc["trees"] = report.trees;
  doc["selection"] = to_string(report.selection);
  doc["n_utterances"] = report.n_utterances;
  doc["speakers"] = report.speakers;
  doc["accuracy_all"] = report.all.accuracy;
  doc["accuracy_selected"] =
      report.selected ? nlohmann::ordered_json(report.selected->accuracy) : nlohmann::ordered_json();
  doc["relative_increase"] =
      report.relative_increase ? nlohmann::ordered_json(*report.relative_increase) : nlohmann::ordered_json();
  doc["n_selected"] = report.selected_features.size();
  doc["selected_features"] = report.selected_features;
  auto imp = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    imp.push_back({{"feature", kFeatures[j].name},
                   {"dimension", to_string(kFeatures[j].dimension)},
                   {"importance", report.importances[j]}});
  }
  doc["importances"] = imp;
  doc["run_all"] = run_json(report.all);
  doc["run_selected"] = report.selected ? run_json(*report.selected) : nlohmann::ordered_json();
  return doc.dump(2) + "\n";
}

std::string importance_csv(const std::vector<double>& importances) {
  if (importances.size() != kFeatureCount) throw Error(ErrorCode::InvalidArgument, "need one importance per feature");
  std::string out = "feature,label,dimension,importance\n";
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    out += fmt::format("{},{},{},{}\n", kFeatures[j].name, kFeatures[j].label, to_string(kFeatures[j].dimension),
                       importances[j]);
  }
  return out;
}

std::string importance_svg(const std::vector<double>& importances) {
  if (importances.size() != kFeatureCount) throw Error(ErrorCode::InvalidArgument, "need one importance per feature");
  constexpr std::array<std::pair<Dimension, const char*>, 3> kColours{
      {{Dimension::VoiceQuality, "#4c72b0"}, {Dimension::Pronunciation, "#dd8452"}, {Dimension::Prosody, "#55a868"}}};
  auto colour = [&](Dimension d) {
    for (const auto& [dim, c] : kColours) {
      if (dim == d) return c;
    }
    return "#888888";
  };
  std::map<Dimension, double> totals;
  for (std::size_t j = 0; j < kFeatureCount; ++j) totals[kFeatures[j].dimension] += importances[j];
  const double feature_max = std::max(1e-12, *std::max_element(importances.begin(), importances.end()));

  constexpr double kLeft = 60.0, kTop = 40.0, kHeight = 260.0, kBar = 16.0, kGap = 4.0;
  const double panel1 = kFeatureCount * (kBar + kGap);
  const double panel2_x = kLeft + panel1 + 80.0;
  const double width = panel2_x + 3 * 60.0 + 40.0;
  const double base = kTop + kHeight;

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" font-family=\"sans-serif\" "
      "font-size=\"10\">\n",
      width, base + 130.0);
  svg += fmt::format("<text x=\"{:.0f}\" y=\"20\" font-size=\"13\">Feature importance</text>\n", kLeft);
  svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"black\"/>\n", kLeft, base,
                     kLeft + panel1);
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    const double h = kHeight * importances[j] / feature_max;
    const double x = kLeft + static_cast<double>(j) * (kBar + kGap);
    svg += fmt::format(
        "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\"><title>{} {:.4f}</title></rect>\n",
        x, base - h, kBar, h, colour(kFeatures[j].dimension), kFeatures[j].label, importances[j]);
    svg += fmt::format("<text transform=\"translate({:.1f},{:.1f}) rotate(-60)\" text-anchor=\"end\">{}</text>\n",
                       x + kBar / 2.0, base + 10.0, kFeatures[j].label);
  }
  svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"12\">Per dimension</text>\n", panel2_x, kTop - 10.0);
  svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"black\"/>\n", panel2_x,
                     base, panel2_x + 3 * 60.0);
  for (std::size_t k = 0; k < kColours.size(); ++k) {
    const auto [dim, c] = kColours[k];
    const double h = kHeight * totals[dim];
    const double x = panel2_x + static_cast<double>(k) * 60.0 + 10.0;
    svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"40\" height=\"{:.1f}\" fill=\"{}\"/>\n", x, base - h, h, c);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3f}</text>\n", x + 20.0, base - h - 4.0,
                       totals[dim]);
    svg += fmt::format("<text transform=\"translate({:.1f},{:.1f}) rotate(-30)\" text-anchor=\"end\">{}</text>\n",
                       x + 20.0, base + 12.0, to_string(dim));
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace dysarthria
