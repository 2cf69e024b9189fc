#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emorec/dataset.hpp"
#include "emorec/factorization.hpp"
#include "emorec/predictor.hpp"

namespace emorec {

// Mean absolute error over the test triples.
double mae(const Predictor& predictor, const RatingDataset& test);

// |slope| of the least-squares line through (log rank, log exposure) after
// dropping zero counts and sorting descending. 0 when fewer than two points
// remain. Uniform exposures give 0; counts proportional to 1/rank give 1.
double dme_from_exposures(std::vector<double> exposures);

// Users with at least one triple, ascending.
std::vector<int> users_of(const RatingDataset& dataset);

// For each listed user, ranks every item unseen in train by predicted rating
// (ties by ascending item id), takes the top k, tallies exposure counts, and
// returns the log-log slope of the tally.
double degree_of_matthew_effect(const Predictor& predictor,
                                const RatingDataset& train,
                                std::span<const int> users, int top_k);

struct EvalReport {
  std::string algorithm;
  double mae = 0.0;
  double dme = 0.0;
  int top_k = 10;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  std::string dataset_id;
  std::string config_snapshot;  // compact JSON of the effective config
};

struct ComparisonConfig {
  TrainConfig train;
  std::vector<double> lambda_grid;  // for emf; empty means {train.lambda}
  PopularityThresholds thresholds;
  int top_k = 10;
  bool dme_all_users = false;  // default: test users only
  std::string dataset_id = "unnamed";
};

struct ComparisonOutcome {
  std::vector<EvalReport> reports;
  // (algorithm, message) for entries that failed; the rest still ran.
  std::vector<std::pair<std::string, std::string>> failures;
};

// Trains/instantiates each named algorithm ("mf", "emf", "random") with the
// same seed and scores it on MAE and the Matthew-effect degree.
ComparisonOutcome run_comparison(const RatingDataset& train,
                                 const RatingDataset& test,
                                 const std::vector<std::string>& algorithms,
                                 const ComparisonConfig& config);

// `algorithm,mae,dme,seed,lambda,dataset`
void write_reports_csv(std::span<const EvalReport> reports,
                       const std::string& path);
std::vector<EvalReport> read_reports_csv(const std::string& path);

// One JSON object per line, config snapshot included.
void write_reports_jsonl(std::span<const EvalReport> reports,
                         const std::string& path);

}  // namespace emorec
