#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace emorec {

struct Rating {
  std::int32_t user;  // internal index, 0..user_count-1
  std::int32_t item;  // internal index, 0..item_count-1
  double value;

  bool operator==(const Rating&) const = default;
};

// Sparse (user, item, rating) triple store with dense internal indices and a
// bidirectional map to the external integer ids. Immutable once built; safe
// to share read-only across threads.
class RatingDataset {
 public:
  explicit RatingDataset(double max_rating = 5.0) : max_rating_(max_rating) {}

  // Appends a rating keyed by external ids. Unknown ids get the next dense
  // index. A repeated (user, item) pair overwrites the stored value in place
  // (keep-last) and bumps the duplicate counter.
  void add(std::int64_t user_id, std::int64_t item_id, double value);

  double max_rating() const { return max_rating_; }
  const std::vector<Rating>& triples() const { return triples_; }
  int user_count() const { return static_cast<int>(user_ids_.size()); }
  int item_count() const { return static_cast<int>(item_ids_.size()); }
  bool empty() const { return triples_.empty(); }

  std::int64_t user_id(int index) const { return user_ids_.at(index); }
  std::int64_t item_id(int index) const { return item_ids_.at(index); }
  std::optional<int> user_index(std::int64_t user_id) const;
  std::optional<int> item_index(std::int64_t item_id) const;

  std::size_t duplicates_resolved() const { return duplicate_count_; }

  bool operator==(const RatingDataset& other) const;

  // Rebuilds a dataset from explicit parts, keeping the id maps as given.
  // Used by split/subsample so children share the parent's maps verbatim.
  static RatingDataset from_parts(std::vector<std::int64_t> user_ids,
                                  std::vector<std::int64_t> item_ids,
                                  double max_rating,
                                  std::vector<Rating> triples);

  const std::vector<std::int64_t>& user_ids() const { return user_ids_; }
  const std::vector<std::int64_t>& item_ids() const { return item_ids_; }

 private:
  double max_rating_;
  std::vector<std::int64_t> user_ids_;
  std::vector<std::int64_t> item_ids_;
  std::unordered_map<std::int64_t, int> user_lookup_;
  std::unordered_map<std::int64_t, int> item_lookup_;
  std::unordered_map<std::uint64_t, std::size_t> cell_lookup_;
  std::vector<Rating> triples_;
  std::size_t duplicate_count_ = 0;
};

struct CatalogEntry {
  std::string title;
  int year = 0;
  std::vector<std::string> genres;

  bool operator==(const CatalogEntry&) const = default;
};

// Keyed by internal item index; only items present in the dataset.
using ItemCatalog = std::map<int, CatalogEntry>;

struct MovielensData {
  RatingDataset dataset;
  ItemCatalog catalog;
};

// Parses the `UserID::MovieID::Rating::Timestamp` ratings format, and the
// companion `MovieID::Title::Genres` file when a path is given. The movies
// file may be in a Western single-byte encoding; bytes above 0x7F are decoded
// as Latin-1. Timestamps are discarded.
MovielensData parse_movielens(const std::string& ratings_path,
                              const std::string& movies_path = "");

struct ColumnSpec {
  std::string user_column = "user_id";
  std::string item_column = "item_id";
  std::string rating_column = "rating";
  char delimiter = ',';
  double max_rating = 5.0;
};

// Delimited text with a header row; columns other than the three named ones
// are ignored.
RatingDataset parse_csv_ratings(const std::string& path,
                                const ColumnSpec& spec = {});

// Canonical triple export: `user_id,item_id,rating` header, LF endings,
// shortest round-trip rating formatting.
void write_triples_csv(const RatingDataset& dataset, const std::string& path);

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
};

struct SplitResult {
  RatingDataset train;
  RatingDataset test;
};

// Per-triple uniform assignment from a seeded generator. Both halves keep the
// parent id maps and dimensions; the two triple sets partition the parent's.
SplitResult split(const RatingDataset& dataset, const SplitSpec& spec);

// Seeded uniform subsample of `count` triples (all of them when count >= size)
// with ids re-compacted to dense indices.
RatingDataset subsample(const RatingDataset& dataset, std::size_t count,
                        std::uint64_t seed);

}  // namespace emorec
