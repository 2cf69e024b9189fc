#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emorec/dataset.hpp"

namespace emorec {

enum class PopClass : std::uint8_t { Popular, Obscure };

// Cutoffs for "large" score/count, expressed as quantiles of the observed
// per-item values. Default is the median for both.
struct PopularityThresholds {
  double score_quantile = 0.5;
  double count_quantile = 0.5;
};

// Per-item mean rating and rating count over a training set, plus the binary
// popularity class once classify() ran. Items with no ratings have no stats.
class ItemStats {
 public:
  int item_count() const { return static_cast<int>(counts_.size()); }
  bool has(int item) const { return counts_[item] > 0; }
  std::size_t rated_item_count() const { return rated_items_; }
  bool classified() const { return classified_; }

  double score(int item) const;      // mean rating; throws if !has(item)
  std::int64_t count(int item) const;
  PopClass cls(int item) const;      // throws before classification

  double score_threshold() const { return score_threshold_; }
  double count_threshold() const { return count_threshold_; }

  friend ItemStats compute_item_stats(const RatingDataset& train);
  friend ItemStats classify(ItemStats stats, const PopularityThresholds& t);

 private:
  std::vector<double> scores_;
  std::vector<std::int64_t> counts_;
  std::vector<PopClass> classes_;
  std::size_t rated_items_ = 0;
  bool classified_ = false;
  double score_threshold_ = 0.0;
  double count_threshold_ = 0.0;
};

ItemStats compute_item_stats(const RatingDataset& train);

// Popular iff score >= score-threshold OR count >= count-threshold, where
// each threshold is the configured quantile of the observed values. The two
// classes are exhaustive and mutually exclusive.
ItemStats classify(ItemStats stats, const PopularityThresholds& t = {});

// Quantile by rank: the value at index floor(q * n) of the ascending sorted
// list, clamped to the last element. q must lie in [0, 1].
double rank_quantile(std::vector<double> values, double q);

// `item_id,score,count,class` with external ids, one row per rated item.
void write_item_stats_csv(const ItemStats& stats, const RatingDataset& dataset,
                          const std::string& path);

}  // namespace emorec
