#include "emorec/emotion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "emorec/csv.hpp"
#include "emorec/errors.hpp"

namespace emorec {

double emotional_score(double rating, double score, double count,
                       PopClass cls) {
  if (!(rating > 0.0) || !(score > 0.0) || !(count > 0.0)) {
    throw ValidationError("emotional score needs positive rating/score/count");
  }
  double base = score * count;
  return cls == PopClass::Popular ? (1.0 / rating) / base : rating / base;
}

double emotional_score(const ItemStats& stats, int item, double rating) {
  return emotional_score(rating, stats.score(item),
                         static_cast<double>(stats.count(item)),
                         stats.cls(item));
}

double EmotionMatrix::normalized_at(int user, int item) const {
  if (user < 0 || user >= users_ || item < 0 || item >= items_) return 0.0;
  auto begin = entries_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[user]);
  auto end =
      entries_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[user + 1]);
  auto it = std::lower_bound(
      begin, end, item,
      [](const EmotionEntry& e, int key) { return e.item < key; });
  if (it == end || it->item != item) return 0.0;
  return it->normalized;
}

std::vector<double> EmotionMatrix::dense_normalized() const {
  std::vector<double> grid(static_cast<std::size_t>(users_) * items_, 0.0);
  for (const EmotionEntry& e : entries_) {
    grid[static_cast<std::size_t>(e.user) * items_ + e.item] = e.normalized;
  }
  return grid;
}

EmotionMatrix build_emotion_matrix(const RatingDataset& train,
                                   const ItemStats& stats) {
  if (!stats.classified()) {
    throw ValidationError("classify item stats before scoring emotions");
  }
  EmotionMatrix m;
  m.users_ = train.user_count();
  m.items_ = train.item_count();
  m.entries_.reserve(train.triples().size());
  for (const Rating& r : train.triples()) {
    double raw = emotional_score(stats, r.item, r.value);
    m.entries_.push_back({r.user, r.item, raw, 0.0});
  }
  std::sort(m.entries_.begin(), m.entries_.end(),
            [](const EmotionEntry& a, const EmotionEntry& b) {
              return a.user != b.user ? a.user < b.user : a.item < b.item;
            });

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const EmotionEntry& e : m.entries_) {
    double lg = std::log(e.raw);
    lo = std::min(lo, lg);
    hi = std::max(hi, lg);
  }
  if (m.entries_.empty()) {
    lo = hi = 0.0;
  }
  m.log_min_ = lo;
  m.log_max_ = hi;
  double range = hi - lo;
  for (EmotionEntry& e : m.entries_) {
    e.normalized = range > 0.0 ? (std::log(e.raw) - lo) / range : 0.5;
  }

  m.row_offsets_.assign(static_cast<std::size_t>(m.users_) + 1, 0);
  for (const EmotionEntry& e : m.entries_) {
    ++m.row_offsets_[static_cast<std::size_t>(e.user) + 1];
  }
  for (std::size_t u = 1; u < m.row_offsets_.size(); ++u) {
    m.row_offsets_[u] += m.row_offsets_[u - 1];
  }
  return m;
}

std::vector<RankedItem> rank_emotional_items(const EmotionMatrix& matrix,
                                             const RatingDataset& dataset,
                                             const ItemCatalog* catalog,
                                             const RankOptions& options) {
  if (options.k < 1) throw ConfigError("ranking size must be >= 1");
  std::vector<double> sums(matrix.item_count(), 0.0);
  std::vector<std::int64_t> observed(matrix.item_count(), 0);
  for (const EmotionEntry& e : matrix.entries()) {
    sums[e.item] += options.use_raw ? e.raw : e.normalized;
    ++observed[e.item];
  }

  std::vector<RankedItem> ranking;
  for (int i = 0; i < matrix.item_count(); ++i) {
    if (observed[i] == 0) continue;
    double denom = options.observed_mean
                       ? static_cast<double>(observed[i])
                       : static_cast<double>(matrix.user_count());
    RankedItem entry{i, dataset.item_id(i), sums[i] / denom, std::nullopt};
    if (catalog) {
      auto it = catalog->find(i);
      if (it != catalog->end()) entry.info = it->second;
    }
    ranking.push_back(std::move(entry));
  }
  std::sort(ranking.begin(), ranking.end(),
            [](const RankedItem& a, const RankedItem& b) {
              return a.mean_es != b.mean_es ? a.mean_es > b.mean_es
                                            : a.item_id < b.item_id;
            });
  if (ranking.size() > static_cast<std::size_t>(options.k)) {
    ranking.resize(static_cast<std::size_t>(options.k));
  }
  return ranking;
}

void write_emotion_csv(const EmotionMatrix& matrix,
                       const RatingDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "user_id,item_id,raw_es,normalized_es\n";
  for (const EmotionEntry& e : matrix.entries()) {
    out << dataset.user_id(e.user) << ',' << dataset.item_id(e.item) << ','
        << format_double(e.raw) << ',' << format_double(e.normalized) << '\n';
  }
  if (!out) throw IoError("short write to " + path);
}

void write_ranking_csv(const std::vector<RankedItem>& ranking,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "title,year,genres,mean_es\n";
  for (const RankedItem& r : ranking) {
    std::string title = std::to_string(r.item_id);
    std::string year;
    std::string genres;
    if (r.info) {
      title = r.info->title;
      if (r.info->year > 0) year = std::to_string(r.info->year);
      for (const std::string& g : r.info->genres) {
        if (!genres.empty()) genres += '|';
        genres += g;
      }
    }
    out << csv_escape(title) << ',' << year << ',' << csv_escape(genres) << ','
        << format_double(r.mean_es) << '\n';
  }
  if (!out) throw IoError("short write to " + path);
}

}  // namespace emorec
