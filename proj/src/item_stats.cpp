#include "emorec/item_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "emorec/csv.hpp"
#include "emorec/errors.hpp"

namespace emorec {

double ItemStats::score(int item) const {
  if (!has(item)) {
    throw ValidationError("no ratings for item index " + std::to_string(item));
  }
  return scores_[item];
}

std::int64_t ItemStats::count(int item) const {
  if (!has(item)) {
    throw ValidationError("no ratings for item index " + std::to_string(item));
  }
  return counts_[item];
}

PopClass ItemStats::cls(int item) const {
  if (!classified_) {
    throw ValidationError("item stats have not been classified yet");
  }
  if (!has(item)) {
    throw ValidationError("no ratings for item index " + std::to_string(item));
  }
  return classes_[item];
}

ItemStats compute_item_stats(const RatingDataset& train) {
  ItemStats stats;
  int n = train.item_count();
  stats.scores_.assign(n, 0.0);
  stats.counts_.assign(n, 0);
  stats.classes_.assign(n, PopClass::Obscure);
  for (const Rating& r : train.triples()) {
    stats.scores_[r.item] += r.value;
    ++stats.counts_[r.item];
  }
  for (int i = 0; i < n; ++i) {
    if (stats.counts_[i] > 0) {
      stats.scores_[i] /= static_cast<double>(stats.counts_[i]);
      ++stats.rated_items_;
    }
  }
  return stats;
}

ItemStats classify(ItemStats stats, const PopularityThresholds& t) {
  std::vector<double> scores;
  std::vector<double> counts;
  scores.reserve(stats.rated_items_);
  counts.reserve(stats.rated_items_);
  for (int i = 0; i < stats.item_count(); ++i) {
    if (!stats.has(i)) continue;
    scores.push_back(stats.scores_[i]);
    counts.push_back(static_cast<double>(stats.counts_[i]));
  }
  if (scores.empty()) {
    throw ValidationError("cannot classify: no rated items");
  }
  stats.score_threshold_ = rank_quantile(std::move(scores), t.score_quantile);
  stats.count_threshold_ = rank_quantile(std::move(counts), t.count_quantile);
  for (int i = 0; i < stats.item_count(); ++i) {
    if (!stats.has(i)) continue;
    bool popular = stats.scores_[i] >= stats.score_threshold_ ||
                   static_cast<double>(stats.counts_[i]) >=
                       stats.count_threshold_;
    stats.classes_[i] = popular ? PopClass::Popular : PopClass::Obscure;
  }
  stats.classified_ = true;
  return stats;
}

double rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("quantile of an empty list");
  if (!(q >= 0.0) || q > 1.0) {
    throw ConfigError("quantile must lie in [0, 1], got " + format_double(q));
  }
  std::sort(values.begin(), values.end());
  auto idx = static_cast<std::size_t>(
      std::floor(q * static_cast<double>(values.size())));
  idx = std::min(idx, values.size() - 1);
  return values[idx];
}

void write_item_stats_csv(const ItemStats& stats, const RatingDataset& dataset,
                          const std::string& path) {
  if (!stats.classified()) {
    throw ValidationError("classify item stats before writing them");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "item_id,score,count,class\n";
  for (int i = 0; i < stats.item_count(); ++i) {
    if (!stats.has(i)) continue;
    out << dataset.item_id(i) << ',' << format_double(stats.score(i)) << ','
        << stats.count(i) << ','
        << (stats.cls(i) == PopClass::Popular ? "popular" : "obscure") << '\n';
  }
  if (!out) throw IoError("short write to " + path);
}

}  // namespace emorec
