#include "emorec/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "emorec/csv.hpp"
#include "emorec/errors.hpp"
#include "emorec/rng.hpp"

namespace emorec {

namespace {

std::uint64_t cell_key(int user, int item) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(user)) << 32) |
         static_cast<std::uint32_t>(item);
}

bool parse_int(const std::string& text, std::int64_t& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc{} && res.ptr == end && !text.empty();
}

bool parse_real(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc{} && res.ptr == end && !text.empty();
}

// Splits on a literal "::". MovieLens titles never contain the separator.
std::vector<std::string> split_double_colon(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find("::", pos);
    if (next == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + 2;
  }
  return fields;
}

// Bytes above 0x7F are taken as Latin-1 and re-encoded as UTF-8, so any
// single-byte Western input decodes without loss.
std::string latin1_to_utf8(const std::string& bytes) {
  std::string out;
  out.reserve(bytes.size());
  for (unsigned char c : bytes) {
    if (c < 0x80) {
      out += static_cast<char>(c);
    } else {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    }
  }
  return out;
}

void strip_trailing_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

void RatingDataset::add(std::int64_t user_id, std::int64_t item_id,
                        double value) {
  if (!(value > 0.0) || value > max_rating_) {
    throw ValidationError("rating " + format_double(value) +
                          " outside (0, " + format_double(max_rating_) + "]");
  }
  auto [uit, u_new] = user_lookup_.try_emplace(user_id, user_count());
  if (u_new) user_ids_.push_back(user_id);
  auto [iit, i_new] = item_lookup_.try_emplace(item_id, item_count());
  if (i_new) item_ids_.push_back(item_id);

  int u = uit->second;
  int i = iit->second;
  auto [cit, fresh] = cell_lookup_.try_emplace(cell_key(u, i), triples_.size());
  if (fresh) {
    triples_.push_back({u, i, value});
  } else {
    triples_[cit->second].value = value;  // keep-last
    ++duplicate_count_;
  }
}

std::optional<int> RatingDataset::user_index(std::int64_t user_id) const {
  auto it = user_lookup_.find(user_id);
  if (it == user_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> RatingDataset::item_index(std::int64_t item_id) const {
  auto it = item_lookup_.find(item_id);
  if (it == item_lookup_.end()) return std::nullopt;
  return it->second;
}

bool RatingDataset::operator==(const RatingDataset& other) const {
  return max_rating_ == other.max_rating_ && user_ids_ == other.user_ids_ &&
         item_ids_ == other.item_ids_ && triples_ == other.triples_;
}

RatingDataset RatingDataset::from_parts(std::vector<std::int64_t> user_ids,
                                        std::vector<std::int64_t> item_ids,
                                        double max_rating,
                                        std::vector<Rating> triples) {
  RatingDataset out(max_rating);
  out.user_ids_ = std::move(user_ids);
  out.item_ids_ = std::move(item_ids);
  for (int i = 0; i < out.user_count(); ++i)
    out.user_lookup_.emplace(out.user_ids_[i], i);
  for (int i = 0; i < out.item_count(); ++i)
    out.item_lookup_.emplace(out.item_ids_[i], i);
  out.triples_ = std::move(triples);
  for (std::size_t t = 0; t < out.triples_.size(); ++t) {
    const Rating& r = out.triples_[t];
    out.cell_lookup_.emplace(cell_key(r.user, r.item), t);
  }
  return out;
}

MovielensData parse_movielens(const std::string& ratings_path,
                              const std::string& movies_path) {
  std::ifstream in(ratings_path, std::ios::binary);
  if (!in) throw IoError("cannot open ratings file: " + ratings_path);

  MovielensData result;
  result.dataset = RatingDataset(5.0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_trailing_cr(line);
    if (line.empty()) continue;
    auto fields = split_double_colon(line);
    if (fields.size() != 4) {
      throw ParseError(ratings_path + " line " + std::to_string(line_no) +
                       ": expected UserID::MovieID::Rating::Timestamp");
    }
    std::int64_t user_id = 0, item_id = 0;
    double rating = 0.0;
    if (!parse_int(fields[0], user_id) || !parse_int(fields[1], item_id) ||
        !parse_real(fields[2], rating)) {
      throw ParseError(ratings_path + " line " + std::to_string(line_no) +
                       ": malformed field");
    }
    result.dataset.add(user_id, item_id, rating);
  }

  if (!movies_path.empty()) {
    std::ifstream movies(movies_path, std::ios::binary);
    if (!movies) throw IoError("cannot open movies file: " + movies_path);
    line_no = 0;
    while (std::getline(movies, line)) {
      ++line_no;
      strip_trailing_cr(line);
      if (line.empty()) continue;
      auto fields = split_double_colon(latin1_to_utf8(line));
      if (fields.size() != 3) {
        throw ParseError(movies_path + " line " + std::to_string(line_no) +
                         ": expected MovieID::Title::Genres");
      }
      std::int64_t movie_id = 0;
      if (!parse_int(fields[0], movie_id)) {
        throw ParseError(movies_path + " line " + std::to_string(line_no) +
                         ": malformed movie id");
      }
      auto index = result.dataset.item_index(movie_id);
      if (!index) continue;  // never rated

      CatalogEntry entry;
      entry.title = fields[1];
      // Trailing " (YYYY)" carries the release year.
      const std::string& t = entry.title;
      if (t.size() >= 7 && t.back() == ')' && t[t.size() - 6] == '(' &&
          t[t.size() - 7] == ' ') {
        std::int64_t year = 0;
        if (parse_int(t.substr(t.size() - 5, 4), year)) {
          entry.year = static_cast<int>(year);
          entry.title = t.substr(0, t.size() - 7);
        }
      }
      std::stringstream genres(fields[2]);
      std::string genre;
      while (std::getline(genres, genre, '|')) {
        if (!genre.empty()) entry.genres.push_back(genre);
      }
      result.catalog[*index] = std::move(entry);
    }
  }
  return result;
}

RatingDataset parse_csv_ratings(const std::string& path,
                                const ColumnSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open ratings file: " + path);

  std::string line;
  if (!std::getline(in, line)) return RatingDataset(spec.max_rating);
  strip_trailing_cr(line);

  auto header = csv_split(line, spec.delimiter);
  auto column_of = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw ConfigError(path + ": no column named '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  std::size_t user_col = column_of(spec.user_column);
  std::size_t item_col = column_of(spec.item_column);
  std::size_t rating_col = column_of(spec.rating_column);

  RatingDataset dataset(spec.max_rating);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_trailing_cr(line);
    if (line.empty()) continue;
    auto fields = csv_split(line, spec.delimiter);
    if (fields.size() <= std::max({user_col, item_col, rating_col})) {
      throw ParseError(path + " row " + std::to_string(line_no) +
                       ": too few columns");
    }
    std::int64_t user_id = 0, item_id = 0;
    double rating = 0.0;
    if (!parse_int(fields[user_col], user_id) ||
        !parse_int(fields[item_col], item_id)) {
      throw ParseError(path + " row " + std::to_string(line_no) +
                       ": malformed id");
    }
    if (!parse_real(fields[rating_col], rating)) {
      throw ParseError(path + " row " + std::to_string(line_no) +
                       ": rating '" + fields[rating_col] + "' is not numeric");
    }
    dataset.add(user_id, item_id, rating);
  }
  return dataset;
}

void write_triples_csv(const RatingDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "user_id,item_id,rating\n";
  for (const Rating& r : dataset.triples()) {
    out << dataset.user_id(r.user) << ',' << dataset.item_id(r.item) << ','
        << format_double(r.value) << '\n';
  }
  if (!out) throw IoError("short write to " + path);
}

SplitResult split(const RatingDataset& dataset, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0) || !(spec.test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0, 1), got " +
                      format_double(spec.test_fraction));
  }
  if (dataset.empty()) throw ValidationError("cannot split an empty dataset");

  Rng rng(spec.seed);
  std::vector<Rating> train_triples;
  std::vector<Rating> test_triples;
  for (const Rating& r : dataset.triples()) {
    if (rng.unit() < spec.test_fraction) {
      test_triples.push_back(r);
    } else {
      train_triples.push_back(r);
    }
  }
  SplitResult result;
  result.train =
      RatingDataset::from_parts(dataset.user_ids(), dataset.item_ids(),
                                dataset.max_rating(), std::move(train_triples));
  result.test =
      RatingDataset::from_parts(dataset.user_ids(), dataset.item_ids(),
                                dataset.max_rating(), std::move(test_triples));
  return result;
}

RatingDataset subsample(const RatingDataset& dataset, std::size_t count,
                        std::uint64_t seed) {
  const auto& triples = dataset.triples();
  std::vector<std::size_t> order(triples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order, rng);
  if (count < order.size()) order.resize(count);
  std::sort(order.begin(), order.end());  // keep original triple order

  RatingDataset out(dataset.max_rating());
  for (std::size_t idx : order) {
    const Rating& r = triples[idx];
    out.add(dataset.user_id(r.user), dataset.item_id(r.item), r.value);
  }
  return out;
}

}  // namespace emorec
