#include "mvi/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "mvi/rng.hpp"

namespace mvi {

ImputationScore score_imputation(const DataMatrix& actual,
                                 const DataMatrix& imputed, const Mask& mask) {
  if (actual.rows() != imputed.rows() || actual.cols() != imputed.cols() ||
      actual.rows() != mask.rows() || actual.cols() != mask.cols())
    throw ShapeError("score_imputation shapes disagree");

  double se = 0.0, actual_sum = 0.0;
  std::size_t n = 0;
  for (Eigen::Index j = 0; j < mask.cols(); ++j)
    for (Eigen::Index i = 0; i < mask.rows(); ++i) {
      if (mask(i, j) != 0) continue;  // evaluate originally-missing cells only
      const double diff = actual.values(i, j) - imputed.values(i, j);
      se += diff * diff;
      actual_sum += actual.values(i, j);
      ++n;
    }
  if (n == 0) throw DataError("no masked cells to score");
  const double mean_actual = actual_sum / static_cast<double>(n);
  if (mean_actual == 0.0)
    throw DataError("undefined normalization: mean of actual values is zero");

  ImputationScore s;
  s.rmse = std::sqrt(se / static_cast<double>(n));
  s.nrmse = s.rmse / mean_actual;
  s.n_cells = n;
  return s;
}

namespace {

/// Stratified fold ids: within each class, shuffled rows are dealt
/// round-robin across folds.
std::vector<int> stratified_folds(const std::vector<double>& labels, int folds,
                                  std::uint64_t seed) {
  std::map<double, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[labels[i]].push_back(i);

  std::vector<int> fold_of(labels.size(), 0);
  Rng rng(derive_seed(seed, "folds", {static_cast<std::uint64_t>(folds)}));
  for (auto& [label, rows] : by_class) {
    rng.shuffle(rows);
    for (std::size_t i = 0; i < rows.size(); ++i)
      fold_of[rows[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

std::size_t min_class_size(const std::vector<double>& labels) {
  std::map<double, std::size_t> counts;
  for (double l : labels) ++counts[l];
  std::size_t m = labels.size();
  for (const auto& [label, c] : counts) m = std::min(m, c);
  return m;
}

double accuracy(const std::vector<double>& predicted,
                const std::vector<double>& truth) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (predicted[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

void take_rows(const Matrix& X, const std::vector<double>& y,
               const std::vector<int>& fold_of, int fold, bool in_fold,
               Matrix& out_x, std::vector<double>& out_y) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < y.size(); ++i)
    if ((fold_of[i] == fold) == in_fold) rows.push_back(i);
  out_x.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out_y.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out_x.row(static_cast<Eigen::Index>(i)) =
        X.row(static_cast<Eigen::Index>(rows[i]));
    out_y[i] = y[rows[i]];
  }
}

}  // namespace

double cross_val_accuracy(const Matrix& X, const std::vector<double>& labels,
                          const ClassifierParams& params, int folds,
                          std::uint64_t seed) {
  const auto fold_of = stratified_folds(labels, folds, seed);
  double total = 0.0;
  for (int f = 0; f < folds; ++f) {
    Matrix train_x, test_x;
    std::vector<double> train_y, test_y;
    take_rows(X, labels, fold_of, f, false, train_x, train_y);
    take_rows(X, labels, fold_of, f, true, test_x, test_y);
    ClassifierParams p = params;
    p.seed = derive_seed(seed, "cv_fit", {static_cast<std::uint64_t>(f)});
    const ClassifierModel model = fit_classifier(train_x, train_y, p);
    total += accuracy(model.classify(test_x), test_y);
  }
  return total / folds;
}

CvResult nested_cv_classify(const Matrix& X, const std::vector<double>& labels,
                            const ClassifierGrid& grid, std::uint64_t seed,
                            int outer_folds, int inner_folds) {
  if (static_cast<std::size_t>(X.rows()) != labels.size())
    throw ShapeError("label count does not match row count");
  const std::size_t min_class = min_class_size(labels);
  if (min_class < 2)
    throw DataError("stratification error: a class has fewer than 2 members; "
                    "merge or drop rare classes before evaluation");
  if (min_class < static_cast<std::size_t>(outer_folds))
    outer_folds = static_cast<int>(min_class);  // collapse, logged by caller

  const auto fold_of = stratified_folds(labels, outer_folds, seed);
  CvResult result;
  result.outer_folds = outer_folds;
  std::vector<double> fold_acc;

  for (int f = 0; f < outer_folds; ++f) {
    Matrix train_x, test_x;
    std::vector<double> train_y, test_y;
    take_rows(X, labels, fold_of, f, false, train_x, train_y);
    take_rows(X, labels, fold_of, f, true, test_x, test_y);

    // inner 2-fold grid search on the outer-training portion
    ClassifierParams best;
    double best_score = -1.0;
    const auto inner_fold_of = stratified_folds(
        train_y, inner_folds, derive_seed(seed, "inner", {static_cast<std::uint64_t>(f)}));
    for (int nt : grid.n_trees)
      for (int md : grid.max_depth) {
        double score = 0.0;
        for (int g = 0; g < inner_folds; ++g) {
          Matrix ix, vx;
          std::vector<double> iy, vy;
          take_rows(train_x, train_y, inner_fold_of, g, false, ix, iy);
          take_rows(train_x, train_y, inner_fold_of, g, true, vx, vy);
          ClassifierParams p;
          p.n_trees = nt;
          p.max_depth = md;
          p.seed = derive_seed(seed, "inner_fit",
                               {static_cast<std::uint64_t>(f),
                                static_cast<std::uint64_t>(g),
                                static_cast<std::uint64_t>(nt),
                                static_cast<std::uint64_t>(md)});
          score += accuracy(fit_classifier(ix, iy, p).classify(vx), vy);
        }
        score /= inner_folds;
        if (score > best_score) {
          best_score = score;
          best.n_trees = nt;
          best.max_depth = md;
        }
      }

    best.seed = derive_seed(seed, "outer_fit", {static_cast<std::uint64_t>(f)});
    const ClassifierModel model = fit_classifier(train_x, train_y, best);
    fold_acc.push_back(accuracy(model.classify(test_x), test_y));
    result.chosen.push_back(best);
  }

  const double mean = std::accumulate(fold_acc.begin(), fold_acc.end(), 0.0) /
                      static_cast<double>(fold_acc.size());
  double var = 0.0;
  for (double a : fold_acc) var += (a - mean) * (a - mean);
  result.mean_accuracy = mean;
  result.std_accuracy = std::sqrt(var / static_cast<double>(fold_acc.size()));
  return result;
}

namespace {

std::vector<int> rates_in(const SweepTable& table, const std::string& dataset,
                          const std::string& type) {
  std::set<int> rates;
  for (const auto& [key, cell] : table)
    if (key.dataset == dataset && key.missing_type == type)
      rates.insert(key.rate_percent);
  return {rates.begin(), rates.end()};
}

std::vector<std::string> models_in(const SweepTable& table,
                                   const std::string& dataset,
                                   const std::string& type) {
  std::set<std::string> models;
  for (const auto& [key, cell] : table)
    if (key.dataset == dataset && key.missing_type == type)
      models.insert(key.model);
  return {models.begin(), models.end()};
}

}  // namespace

double sum_nrmse(const SweepTable& table, const std::string& dataset,
                 const std::string& missing_type, const std::string& model,
                 const std::vector<int>& rate_grid) {
  double total = 0.0;
  for (int rate : rate_grid) {
    const auto it = table.find(SweepKey{dataset, missing_type, rate, model});
    if (it == table.end())
      throw DataError("coverage error: missing cell (" + dataset + ", " +
                      missing_type + ", " + std::to_string(rate) + "%, " +
                      model + ")");
    total += it->second.test_score.nrmse;
  }
  return total;
}

std::string vote_best_model(const SweepTable& table, const std::string& dataset,
                            const std::string& missing_type) {
  const auto rates = rates_in(table, dataset, missing_type);
  const auto models = models_in(table, dataset, missing_type);
  if (models.size() < 2)
    throw DataError("voting needs at least 2 models for (" + dataset + ", " +
                    missing_type + ")");

  std::map<std::string, int> wins;
  for (int rate : rates) {
    std::string winner;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& model : models) {
      const auto it = table.find(SweepKey{dataset, missing_type, rate, model});
      if (it == table.end())
        throw DataError("coverage error: missing cell (" + dataset + ", " +
                        missing_type + ", " + std::to_string(rate) + "%, " +
                        model + ")");
      if (it->second.test_score.nrmse < best) {
        best = it->second.test_score.nrmse;
        winner = model;
      }
    }
    ++wins[winner];
  }

  std::string best_model;
  int best_wins = -1;
  double best_sum = std::numeric_limits<double>::infinity();
  for (const auto& model : models) {
    const int w = wins.count(model) ? wins.at(model) : 0;
    const double s = sum_nrmse(table, dataset, missing_type, model, rates);
    if (w > best_wins || (w == best_wins && s < best_sum)) {
      best_wins = w;
      best_sum = s;
      best_model = model;
    }
  }
  return best_model;
}

}  // namespace mvi
