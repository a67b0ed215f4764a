// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#include "fg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fg/error.hpp"

namespace fg {
namespace {

void check_pairs(std::span<const ScorePair> pairs) {
  if (pairs.size() < 2) {
    throw Error(ErrorCode::kEmptyInput, "correlation needs at least two items");
  }
  std::set<std::string_view> ids;
  for (const auto& p : pairs) {
    if (!ids.insert(p.id).second) {
      throw Error(ErrorCode::kInvalidArgument, "repeated item id " + p.id);
    }
    if (!std::isfinite(p.predicted) || !std::isfinite(p.reference)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite score for item " + p.id);
    }
  }
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::kDegenerateVariance, "one side of the correlation is constant");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

std::vector<double> fractional_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j share the mean of ranks i+1..j+1.
    const double rank = (static_cast<double>(i + j) + 2.0) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double srcc(std::span<const ScorePair> pairs) {
  check_pairs(pairs);
  std::vector<double> pred;
  std::vector<double> ref;
  for (const auto& p : pairs) {
    pred.push_back(p.predicted);
    ref.push_back(p.reference);
  }
  return pearson(fractional_ranks(pred), fractional_ranks(ref));
}

double plcc(std::span<const ScorePair> pairs) {
  check_pairs(pairs);
  std::vector<double> pred;
  std::vector<double> ref;
  for (const auto& p : pairs) {
    pred.push_back(p.predicted);
    ref.push_back(p.reference);
  }
  return pearson(pred, ref);
}

std::string_view preference_label_name(PreferenceLabel l) {
  switch (l) {
    case PreferenceLabel::kWin: return "win";
    case PreferenceLabel::kLose: return "lose";
    case PreferenceLabel::kTie: return "tie";
  }
  return "";
}

std::optional<PreferenceLabel> parse_preference_label(std::string_view name) {
  if (name == "win") return PreferenceLabel::kWin;
  if (name == "lose") return PreferenceLabel::kLose;
  if (name == "tie") return PreferenceLabel::kTie;
  return std::nullopt;
}

PairwiseAccuracy pairwise_tau_diff(std::span<const PreferencePair> pairs,
                                   std::span<const double> tie_threshold_grid) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no preference pairs");
  }
  std::vector<double> grid(tie_threshold_grid.begin(), tie_threshold_grid.end());
  if (grid.empty()) grid.push_back(0.0);
  for (double t : grid) {
    if (!std::isfinite(t) || t < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "tie thresholds must be finite and >= 0");
    }
  }
  std::sort(grid.begin(), grid.end());
  for (const auto& p : pairs) {
    if (!std::isfinite(p.score_a) || !std::isfinite(p.score_b)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite score in pair " + p.pair_id);
    }
  }

  PairwiseAccuracy out;
  out.n = pairs.size();

  std::size_t diff_hits = 0;
  for (const auto& p : pairs) {
    if (p.human_label == PreferenceLabel::kTie) continue;
    ++out.n_non_tie;
    const auto predicted = p.score_a > p.score_b ? PreferenceLabel::kWin : PreferenceLabel::kLose;
    if (predicted == p.human_label) ++diff_hits;
  }
  if (out.n_non_tie > 0) {
    out.diff = static_cast<double>(diff_hits) / static_cast<double>(out.n_non_tie);
  }

  std::size_t best_hits = 0;
  bool first = true;
  for (double t : grid) {
    std::size_t hits = 0;
    for (const auto& p : pairs) {
      PreferenceLabel predicted = PreferenceLabel::kTie;
      if (std::abs(p.score_a - p.score_b) > t) {
        predicted = p.score_a > p.score_b ? PreferenceLabel::kWin : PreferenceLabel::kLose;
      }
      if (predicted == p.human_label) ++hits;
    }
    if (first || hits > best_hits) {
      best_hits = hits;
      out.tie_threshold = t;
      first = false;
    }
  }
  out.tau = static_cast<double>(best_hits) / static_cast<double>(out.n);
  return out;
}

std::vector<double> threshold_grid(double max, std::size_t steps) {
  std::vector<double> grid;
  if (steps == 0) return {0.0};
  for (std::size_t i = 0; i <= steps; ++i) {
    grid.push_back(max * static_cast<double>(i) / static_cast<double>(steps));
  }
  return grid;
}

}  // namespace fg
