#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emorec/dataset.hpp"
#include "emorec/item_stats.hpp"

namespace emorec {

// Emotional score of one rating. A user disliking a popular item or liking an
// obscure one counts as emotionally charged:
//   popular item:  (1/r) / (score * count)
//   obscure item:   r    / (score * count)
// Always positive for valid inputs, so the log transform downstream is
// defined everywhere.
double emotional_score(double rating, double score, double count, PopClass cls);

// Lookup variant; throws ValidationError when the item has no stats.
double emotional_score(const ItemStats& stats, int item, double rating);

struct EmotionEntry {
  std::int32_t user;
  std::int32_t item;
  double raw;         // positive
  double normalized;  // in [0, 1]
};

// Raw and log-normalized emotional scores for every observed (user, item)
// pair. Normalization is min-max over log(raw) across observed cells; cells
// never rated sit at exactly 0. When every observed log value coincides, the
// degenerate range maps every observed cell to 0.5.
class EmotionMatrix {
 public:
  int user_count() const { return users_; }
  int item_count() const { return items_; }
  const std::vector<EmotionEntry>& entries() const { return entries_; }
  double log_min() const { return log_min_; }
  double log_max() const { return log_max_; }

  // 0 for unobserved cells.
  double normalized_at(int user, int item) const;

  // Row-major user_count x item_count expansion.
  std::vector<double> dense_normalized() const;

  friend EmotionMatrix build_emotion_matrix(const RatingDataset& train,
                                            const ItemStats& stats);

 private:
  int users_ = 0;
  int items_ = 0;
  std::vector<EmotionEntry> entries_;  // sorted by (user, item)
  std::vector<std::size_t> row_offsets_;
  double log_min_ = 0.0;
  double log_max_ = 0.0;
};

EmotionMatrix build_emotion_matrix(const RatingDataset& train,
                                   const ItemStats& stats);

struct RankOptions {
  int k = 10;
  // Mean over every user (missing cells count as 0) when false; mean over the
  // item's observed cells only when true.
  bool observed_mean = false;
  bool use_raw = false;  // rank on raw scores instead of normalized
};

struct RankedItem {
  int item;
  std::int64_t item_id;
  double mean_es;
  std::optional<CatalogEntry> info;
};

// Items ordered by mean emotional score, ties broken by ascending external
// item id. k is clamped to the number of rated items.
std::vector<RankedItem> rank_emotional_items(const EmotionMatrix& matrix,
                                             const RatingDataset& dataset,
                                             const ItemCatalog* catalog,
                                             const RankOptions& options);

// `user_id,item_id,raw_es,normalized_es`, rows in (user, item) index order.
void write_emotion_csv(const EmotionMatrix& matrix,
                       const RatingDataset& dataset, const std::string& path);

// `title,year,genres,mean_es`; items without catalog info fall back to the
// external id as title.
void write_ranking_csv(const std::vector<RankedItem>& ranking,
                       const std::string& path);

}  // namespace emorec
