// Copyright 2026 The finegrain Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FG_METRICS_HPP_
#define FG_METRICS_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fg {

struct ScorePair {
  std::string id;
  double predicted = 0.0;
  double reference = 0.0;
};

// Average (fractional) ranks, 1-based.
std::vector<double> fractional_ranks(std::span<const double> values);

// Both throw EmptyInput below two items, InvalidArgument on repeated ids or
// non-finite values, DegenerateVariance when either side is constant.
double srcc(std::span<const ScorePair> pairs);
double plcc(std::span<const ScorePair> pairs);

enum class PreferenceLabel { kWin, kLose, kTie };

std::string_view preference_label_name(PreferenceLabel l);
std::optional<PreferenceLabel> parse_preference_label(std::string_view name);

struct PreferencePair {
  std::string pair_id;
  double score_a = 0.0;
  double score_b = 0.0;
  PreferenceLabel human_label = PreferenceLabel::kTie;
};

struct PairwiseAccuracy {
  // Tie-calibrated accuracy over every pair.
  double tau = 0.0;
  // Accuracy over pairs the humans did not call a tie; absent when every
  // pair is a human tie.
  std::optional<double> diff;
  // Gap threshold at or below which a tie is predicted; the smallest grid
  // value reaching the best tau.
  double tie_threshold = 0.0;
  std::size_t n = 0;
  std::size_t n_non_tie = 0;
};

// An empty grid means {0}. Throws EmptyInput for no pairs, InvalidArgument
// for a negative or non-finite threshold.
PairwiseAccuracy pairwise_tau_diff(std::span<const PreferencePair> pairs,
                                   std::span<const double> tie_threshold_grid);

// Evenly spaced thresholds 0, step, ..., max inclusive.
std::vector<double> threshold_grid(double max, std::size_t steps);

}  // namespace fg

#endif  // FG_METRICS_HPP_
