#include <algorithm>
#include <cmath>
#include <limits>

#include "dysarthria/error.hpp"
#include "dysarthria/ml.hpp"

namespace dysarthria {

namespace {

constexpr double kTau = 1e-12;

}  // namespace

DualSolution solve_svm_dual(const Matrix& kernel, const std::vector<int>& y, double c, double tolerance,
                            std::size_t max_iterations) {
  const std::size_t n = y.size();
  if (n == 0 || kernel.size() != n) throw Error(ErrorCode::InvalidArgument, "kernel and labels disagree");
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "C must be positive");
  if (max_iterations == 0) max_iterations = std::max<std::size_t>(100000, 100 * n);

  auto q = [&](std::size_t i, std::size_t j) { return static_cast<double>(y[i] * y[j]) * kernel[i][j]; };
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // Q alpha - e
  auto at_upper = [&](std::size_t i) { return alpha[i] >= c; };
  auto at_lower = [&](std::size_t i) { return alpha[i] <= 0.0; };

  DualSolution sol;
  for (;; ++sol.iterations) {
    // second-order working set selection
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i_sel = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (!at_upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          i_sel = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!at_lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        i_sel = static_cast<std::ptrdiff_t>(t);
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t j_sel = -1;
    double best = std::numeric_limits<double>::infinity();
    if (i_sel >= 0) {
      const auto i = static_cast<std::size_t>(i_sel);
      for (std::size_t t = 0; t < n; ++t) {
        double diff = 0.0;
        double quad = 0.0;
        if (y[t] == 1) {
          if (at_lower(t)) continue;
          gmax2 = std::max(gmax2, grad[t]);
          diff = gmax + grad[t];
          quad = q(i, i) + q(t, t) - 2.0 * y[i] * q(i, t);
        } else {
          if (at_upper(t)) continue;
          gmax2 = std::max(gmax2, -grad[t]);
          diff = gmax - grad[t];
          quad = q(i, i) + q(t, t) + 2.0 * y[i] * q(i, t);
        }
        if (diff > 0.0) {
          const double obj = -(diff * diff) / (quad > 0.0 ? quad : kTau);
          if (obj <= best) {
            best = obj;
            j_sel = static_cast<std::ptrdiff_t>(t);
          }
        }
      }
    }
    if (i_sel < 0 || j_sel < 0 || gmax + gmax2 < tolerance) break;
    if (sol.iterations >= max_iterations) {
      throw Error(ErrorCode::NoConvergence, "SMO stopped after " + std::to_string(max_iterations) + " iterations");
    }

    const auto i = static_cast<std::size_t>(i_sel);
    const auto j = static_cast<std::size_t>(j_sel);
    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = sum;
        }
        if (alpha[i] < 0.0) {
          alpha[i] = 0.0;
          alpha[j] = sum;
        }
      }
    }
    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(i, t) * di + q(j, t) * dj;
  }

  // bias from free vectors, else the middle of the feasible interval
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (at_upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      free_sum += yg;
    }
  }
  sol.rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : 0.5 * (ub + lb);

  double objective = 0.0;  // 1/2 a'Qa - e'a = 1/2 sum a_i (G_i - 1)
  for (std::size_t t = 0; t < n; ++t) objective += alpha[t] * (grad[t] - 1.0);
  sol.dual_objective = -0.5 * objective;
  sol.alpha = std::move(alpha);
  return sol;
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
  return std::exp(-gamma * d2);
}

SvmModel train_svm(const Matrix& x, const std::vector<int>& y, double c, double gamma, const Matrix& kernel) {
  if (x.size() != y.size() || kernel.size() != x.size()) {
    throw Error(ErrorCode::InvalidArgument, "rows, labels and kernel disagree");
  }
  SvmModel model;
  model.c = c;
  model.gamma = gamma;
  model.classes = y;
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
  if (model.classes.size() < 2) throw Error(ErrorCode::SingleClass, "SVM needs at least two classes");

  std::vector<std::ptrdiff_t> stored(x.size(), -1);
  for (std::size_t a = 0; a < model.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
      std::vector<std::size_t> rows;
      std::vector<int> sign;
      for (std::size_t r = 0; r < x.size(); ++r) {
        if (y[r] == model.classes[a] || y[r] == model.classes[b]) {
          rows.push_back(r);
          sign.push_back(y[r] == model.classes[a] ? 1 : -1);
        }
      }
      Matrix sub(rows.size(), std::vector<double>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows.size(); ++j) sub[i][j] = kernel[rows[i]][rows[j]];
      }
      const auto sol = solve_svm_dual(sub, sign, c);
      BinarySvm pair;
      pair.positive = model.classes[a];
      pair.negative = model.classes[b];
      pair.rho = sol.rho;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (sol.alpha[i] <= 0.0) continue;
        if (stored[rows[i]] < 0) {
          stored[rows[i]] = static_cast<std::ptrdiff_t>(model.vectors.size());
          model.vectors.push_back(x[rows[i]]);
        }
        pair.support.push_back(static_cast<std::size_t>(stored[rows[i]]));
        pair.coef.push_back(sol.alpha[i] * sign[i]);
      }
      model.pairs.push_back(std::move(pair));
    }
  }
  return model;
}

SvmModel train_svm(const Matrix& x, const std::vector<int>& y, double c, double gamma) {
  Matrix kernel(x.size(), std::vector<double>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i; j < x.size(); ++j) kernel[i][j] = kernel[j][i] = rbf_kernel(x[i], x[j], gamma);
  }
  return train_svm(x, y, c, gamma, kernel);
}

int predict(const SvmModel& model, std::span<const double> row) {
  std::vector<double> k(model.vectors.size());
  for (std::size_t v = 0; v < model.vectors.size(); ++v) k[v] = rbf_kernel(model.vectors[v], row, model.gamma);
  std::vector<int> votes(model.classes.size(), 0);
  auto slot = [&](int label) {
    return static_cast<std::size_t>(std::lower_bound(model.classes.begin(), model.classes.end(), label) -
                                    model.classes.begin());
  };
  for (const auto& pair : model.pairs) {
    double f = -pair.rho;
    for (std::size_t s = 0; s < pair.support.size(); ++s) f += pair.coef[s] * k[pair.support[s]];
    ++votes[slot(f > 0.0 ? pair.positive : pair.negative)];
  }
  return model.classes[static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin())];
}

}  // namespace dysarthria
