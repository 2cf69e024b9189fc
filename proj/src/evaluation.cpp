#include "emorec/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "emorec/csv.hpp"
#include "emorec/errors.hpp"
#include "emorec/item_stats.hpp"

namespace emorec {

double mae(const Predictor& predictor, const RatingDataset& test) {
  if (test.empty()) throw ValidationError("MAE of an empty test set");
  double sum = 0.0;
  for (const Rating& r : test.triples()) {
    sum += std::fabs(predictor.predict(r.user, r.item) - r.value);
  }
  return sum / static_cast<double>(test.triples().size());
}

double dme_from_exposures(std::vector<double> exposures) {
  std::erase_if(exposures, [](double e) { return !(e > 0.0); });
  std::sort(exposures.begin(), exposures.end(), std::greater<>());
  std::size_t n = exposures.size();
  if (n < 2) return 0.0;

  double sx = 0.0, sy = 0.0;
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = std::log(static_cast<double>(i + 1));
    ys[i] = std::log(exposures[i]);
    sx += xs[i];
    sy += ys[i];
  }
  double mx = sx / static_cast<double>(n);
  double my = sy / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) return 0.0;
  return std::fabs(sxy / sxx);
}

std::vector<int> users_of(const RatingDataset& dataset) {
  std::vector<char> seen(dataset.user_count(), 0);
  for (const Rating& r : dataset.triples()) seen[r.user] = 1;
  std::vector<int> users;
  for (int u = 0; u < dataset.user_count(); ++u) {
    if (seen[u]) users.push_back(u);
  }
  return users;
}

double degree_of_matthew_effect(const Predictor& predictor,
                                const RatingDataset& train,
                                std::span<const int> users, int top_k) {
  if (top_k < 1) throw ConfigError("top-k must be >= 1");
  int n_items = train.item_count();
  std::vector<std::vector<std::int32_t>> seen(train.user_count());
  for (const Rating& r : train.triples()) seen[r.user].push_back(r.item);

  std::vector<char> mask(n_items, 0);
  std::vector<double> exposure(n_items, 0.0);
  struct Scored {
    double score;
    std::int64_t item_id;  // ties break on the external id
    int item;
  };
  std::vector<Scored> candidates;
  candidates.reserve(n_items);
  bool any_eligible = false;

  for (int u : users) {
    if (u < 0 || u >= train.user_count()) {
      throw ValidationError("user index out of range: " + std::to_string(u));
    }
    for (std::int32_t j : seen[u]) mask[j] = 1;
    candidates.clear();
    for (int j = 0; j < n_items; ++j) {
      if (!mask[j]) {
        candidates.push_back({predictor.predict(u, j), train.item_id(j), j});
      }
    }
    for (std::int32_t j : seen[u]) mask[j] = 0;

    auto take = std::min(static_cast<std::size_t>(top_k), candidates.size());
    if (take > 0) any_eligible = true;
    std::partial_sort(candidates.begin(),
                      candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), [](const Scored& a, const Scored& b) {
                        return a.score != b.score ? a.score > b.score
                                                  : a.item_id < b.item_id;
                      });
    for (std::size_t i = 0; i < take; ++i) {
      exposure[candidates[i].item] += 1.0;
    }
  }
  if (!any_eligible) {
    throw ValidationError("no user has an unseen item to rank");
  }
  return dme_from_exposures(std::move(exposure));
}

namespace {

std::string config_json(const TrainConfig& c) {
  nlohmann::json j{{"d", c.d},
                   {"learning_rate", c.learning_rate},
                   {"lambda", c.lambda},
                   {"epochs", c.epochs},
                   {"seed", c.seed},
                   {"init_scale", c.init_scale},
                   {"cosine_floor", c.cosine_floor},
                   {"norm_floor", c.norm_floor}};
  return j.dump();
}

EvalReport score(const Predictor& predictor, const RatingDataset& train,
                 const RatingDataset& test, std::span<const int> users,
                 const ComparisonConfig& config, double lambda,
                 std::string config_snapshot) {
  EvalReport report;
  report.algorithm = predictor.name();
  report.mae = mae(predictor, test);
  report.dme = degree_of_matthew_effect(predictor, train, users, config.top_k);
  report.top_k = config.top_k;
  report.seed = config.train.seed;
  report.lambda = lambda;
  report.dataset_id = config.dataset_id;
  report.config_snapshot = std::move(config_snapshot);
  return report;
}

}  // namespace

ComparisonOutcome run_comparison(const RatingDataset& train,
                                 const RatingDataset& test,
                                 const std::vector<std::string>& algorithms,
                                 const ComparisonConfig& config) {
  if (algorithms.empty()) throw ConfigError("no algorithms requested");

  std::vector<int> users;
  if (config.dme_all_users) {
    users.resize(train.user_count());
    std::iota(users.begin(), users.end(), 0);
  } else {
    users = users_of(test);
  }

  ItemStats stats;
  bool have_stats = false;
  ComparisonOutcome outcome;
  for (const std::string& algo : algorithms) {
    try {
      if (algo == "mf") {
        TrainConfig c = config.train;
        c.lambda = 0.0;
        ModelPredictor predictor(train_mf(train, c), "mf");
        outcome.reports.push_back(
            score(predictor, train, test, users, config, 0.0, config_json(c)));
      } else if (algo == "emf") {
        if (!have_stats) {
          stats = classify(compute_item_stats(train), config.thresholds);
          have_stats = true;
        }
        std::vector<double> grid = config.lambda_grid;
        if (grid.empty()) grid.push_back(config.train.lambda);
        for (double lambda : grid) {
          TrainConfig c = config.train;
          c.lambda = lambda;
          ModelPredictor predictor(train_emf(train, stats, c), "emf");
          outcome.reports.push_back(score(predictor, train, test, users, config,
                                          lambda, config_json(c)));
        }
      } else if (algo == "random") {
        RandomPredictor predictor(derive_seed(config.train.seed, "random"),
                                  train.max_rating());
        nlohmann::json j{{"seed", derive_seed(config.train.seed, "random")}};
        outcome.reports.push_back(
            score(predictor, train, test, users, config, 0.0, j.dump()));
      } else {
        throw ConfigError("unknown algorithm: " + algo);
      }
    } catch (const Error& e) {
      outcome.failures.emplace_back(algo, e.what());
    }
  }
  return outcome;
}

void write_reports_csv(std::span<const EvalReport> reports,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "algorithm,mae,dme,seed,lambda,dataset\n";
  for (const EvalReport& r : reports) {
    out << csv_escape(r.algorithm) << ',' << format_double(r.mae) << ','
        << format_double(r.dme) << ',' << r.seed << ','
        << format_double(r.lambda) << ',' << csv_escape(r.dataset_id) << '\n';
  }
  if (!out) throw IoError("short write to " + path);
}

std::vector<EvalReport> read_reports_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open report file: " + path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "algorithm,mae,dme,seed,lambda,dataset") {
    throw ParseError(path + ": unexpected report header");
  }
  std::vector<EvalReport> reports;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = csv_split(line);
    if (fields.size() != 6) {
      throw ParseError(path + " row " + std::to_string(line_no) +
                       ": expected 6 columns");
    }
    EvalReport r;
    r.algorithm = fields[0];
    try {
      r.mae = std::stod(fields[1]);
      r.dme = std::stod(fields[2]);
      r.seed = std::stoull(fields[3]);
      r.lambda = std::stod(fields[4]);
    } catch (const std::exception&) {
      throw ParseError(path + " row " + std::to_string(line_no) +
                       ": malformed numeric field");
    }
    r.dataset_id = fields[5];
    reports.push_back(std::move(r));
  }
  return reports;
}

void write_reports_jsonl(std::span<const EvalReport> reports,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const EvalReport& r : reports) {
    nlohmann::json config = nlohmann::json::object();
    if (!r.config_snapshot.empty()) {
      config = nlohmann::json::parse(r.config_snapshot);
    }
    nlohmann::json j{{"algorithm", r.algorithm}, {"mae", r.mae},
                     {"dme", r.dme},             {"top_k", r.top_k},
                     {"seed", r.seed},           {"lambda", r.lambda},
                     {"dataset", r.dataset_id},  {"config", config}};
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("short write to " + path);
}

}  // namespace emorec
