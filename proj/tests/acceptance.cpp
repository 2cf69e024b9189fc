// Acceptance gate: one PASS/FAIL line per criterion, exit 0 only when every
// criterion that ran passed. --core runs the data-free criteria; the three
// MovieLens 1M criteria run when the dataset directory is available (flag
// --movielens <dir> or MOVIELENS_1M_DIR), and --movielens-only exits 77 when
// it is not, so harnesses can record a skip instead of a failure.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "emorec/csv.hpp"
#include "emorec/dataset.hpp"
#include "emorec/emotion.hpp"
#include "emorec/errors.hpp"
#include "emorec/evaluation.hpp"
#include "emorec/factorization.hpp"
#include "emorec/item_stats.hpp"
#include "emorec/predictor.hpp"
#include "emorec/rng.hpp"
#include "testutil.hpp"

namespace fs = std::filesystem;
using namespace emorec;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok,
            const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << name;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << '\n';
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

std::string fmt(double v, int precision = 3) {
  return format_fixed(v, precision);
}

// ------------------------------------------------------------- criterion 1

void criterion_gradient_oracle() {
  auto start = std::chrono::steady_clock::now();
  emorec::Rng rng(20240801);
  const double h = 1e-6;
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    TrainConfig cfg;
    cfg.d = (t % 2) ? 16 : 2;
    double lambda = std::array{0.0, 0.01, 1.0}[t % 3];
    PopClass cls = (t / 3 % 2) ? PopClass::Popular : PopClass::Obscure;
    std::vector<double> u(cfg.d), v(cfg.d);
    auto fill = [&] {
      for (double& x : u) x = 2.0 * rng.unit() - 1.0;
      for (double& x : v) x = 2.0 * rng.unit() - 1.0;
    };
    auto cos_of = [&] {
      double t0 = 0, t1 = 0, t3 = 0;
      for (int k = 0; k < cfg.d; ++k) {
        t0 += u[k] * u[k];
        t1 += v[k] * v[k];
        t3 += u[k] * v[k];
      }
      return t3 / std::sqrt(t0 * t1);
    };
    fill();
    while (std::fabs(cos_of()) < 1e-2) fill();  // keep clear of the clamp
    double y = rng.unit();
    double stc = 0.5 + 99.5 * rng.unit();

    std::vector<double> gu(cfg.d), gv(cfg.d);
    cell_gradients(u, v, y, lambda, stc, cls, cfg, gu, gv);
    auto [fu, fv] = testutil::fd_gradients(u, v, y, lambda, stc, cls, cfg, h);
    auto rel_err = [](const std::vector<double>& a,
                      const std::vector<double>& b) {
      double diff = 0.0, ref = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        diff += (a[k] - b[k]) * (a[k] - b[k]);
        ref += b[k] * b[k];
      }
      return std::sqrt(diff) / std::max(std::sqrt(ref), 1e-12);
    };
    worst = std::max({worst, rel_err(gu, fu), rel_err(gv, fv)});
  }
  double elapsed = seconds_since(start);
  report(1, "gradient oracle",
         worst < 1e-4 && elapsed < 10.0,
         "1000 configs, max rel err " + format_double(worst) + ", " +
             fmt(elapsed) + "s");
}

// ------------------------------------------------------------- criterion 2

void criterion_es_oracle() {
  auto start = std::chrono::steady_clock::now();
  auto base = testutil::dense_random_dataset(50, 40, 0.5, 4242);
  std::vector<std::tuple<std::int64_t, std::int64_t, double>> triples;
  for (const Rating& r : base.triples()) {
    triples.emplace_back(base.user_id(r.user), base.item_id(r.item), r.value);
  }
  RatingDataset ds;
  for (const auto& [u, i, r] : triples) ds.add(u, i, r);
  auto matrix = build_emotion_matrix(ds, classify(compute_item_stats(ds)));
  auto oracle = testutil::naive_emotion(triples, 0.5, 0.5);

  bool ok = matrix.entries().size() == oracle.raw.size();
  double worst_norm = 0.0;
  for (const auto& e : matrix.entries()) {
    std::pair<std::int64_t, std::int64_t> key{ds.user_id(e.user),
                                              ds.item_id(e.item)};
    auto it = oracle.raw.find(key);
    if (it == oracle.raw.end() || e.raw != it->second) {
      ok = false;
      break;
    }
    worst_norm = std::max(
        worst_norm, std::fabs(e.normalized - oracle.normalized.at(key)));
  }
  ok = ok && worst_norm <= 1e-12;
  // spot-check that unobserved cells sit at exactly zero
  std::size_t observed = 0;
  for (int u = 0; u < matrix.user_count() && ok; ++u) {
    for (int j = 0; j < matrix.item_count(); ++j) {
      double val = matrix.normalized_at(u, j);
      if (oracle.raw.count({ds.user_id(u), ds.item_id(j)})) {
        ++observed;
      } else if (val != 0.0) {
        ok = false;
        break;
      }
    }
  }
  ok = ok && observed == oracle.raw.size();
  double elapsed = seconds_since(start);
  ok = ok && elapsed < 1.0;
  report(2, "emotional score oracle", ok,
         std::to_string(matrix.entries().size()) + " cells, raw exact, " +
             "norm diff " + format_double(worst_norm) + ", " + fmt(elapsed) +
             "s");
}

// ------------------------------------------------------------- criterion 6

void criterion_reduction(const fs::path& scratch) {
  auto ds = testutil::synthetic_dataset(25, 20, 8, 606);
  auto stats = classify(compute_item_stats(ds));
  TrainConfig cfg;
  cfg.d = 6;
  cfg.epochs = 4;
  cfg.lambda = 0.0;
  auto emf = train_emf(ds, stats, cfg);
  cfg.lambda = 0.9;  // train_mf must zero this itself
  auto mf = train_mf(ds, cfg);

  fs::path a = scratch / "reduction_a.emf";
  fs::path b = scratch / "reduction_b.emf";
  save_model(emf, a.string());
  save_model(mf, b.string());
  bool lib_ok = testutil::read_file(a.string()) ==
                testutil::read_file(b.string());

  // same through the CLI
  fs::path ratings = scratch / "reduction_ratings.csv";
  write_triples_csv(ds, ratings.string());
  fs::path mf_dir = scratch / "reduction_mf";
  fs::path emf_dir = scratch / "reduction_emf";
  std::string common = " --ratings " + ratings.string() +
                       " --dim 6 --epochs 4 --seed 42";
  bool cli_ok =
      testutil::run_cli("train --algo mf" + common + " --out-dir " +
                        mf_dir.string()) == 0 &&
      testutil::run_cli("train --algo emf --lambda 0" + common +
                        " --out-dir " + emf_dir.string()) == 0 &&
      testutil::read_file((mf_dir / "model.emf").string()) ==
          testutil::read_file((emf_dir / "model.emf").string());

  report(6, "lambda-zero reduction", lib_ok && cli_ok,
         std::string("library files ") + (lib_ok ? "equal" : "differ") +
             ", cli files " + (cli_ok ? "equal" : "differ"));
}

// ------------------------------------------------------------- criterion 7

void criterion_dme_anchors() {
  std::vector<double> zipf;
  for (int r = 1; r <= 10; ++r) zipf.push_back(27720.0 / r);
  double z = dme_from_exposures(zipf);
  double u = dme_from_exposures({6.0, 6.0, 6.0, 6.0, 6.0});
  bool ok = std::fabs(z - 1.0) <= 1e-9 && u == 0.0;
  report(7, "matthew-degree anchors", ok,
         "zipf " + format_double(z) + ", uniform " + format_double(u));
}

// --------------------------------------------------------- criteria 8 and 9

struct StageRun {
  std::string name;
  std::string args;  // everything but --out-dir
  std::vector<std::string> artifacts;
};

void criteria_determinism_finiteness(const fs::path& scratch) {
  auto ds = testutil::synthetic_dataset(40, 30, 12, 808);
  fs::path ratings = scratch / "det_ratings.csv";
  write_triples_csv(ds, ratings.string());
  std::string in = " --ratings " + ratings.string();

  std::vector<StageRun> stages = {
      {"ingest", "ingest" + in + " --sample 300 --seed 9",
       {"triples.csv", "ingest.manifest.json"}},
      {"emotion", "emotion" + in + " --top 10",
       {"emotion_scores.csv", "item_stats.csv", "ranking.csv",
        "emotion.manifest.json"}},
      {"train", "train" + in + " --algo emf --dim 8 --epochs 5",
       {"model.emf", "train.manifest.json"}},
      {"evaluate",
       "evaluate" + in +
           " --algos mf,emf,random --dim 4 --epochs 3 --top-k 5",
       {"comparison.csv", "comparison.jsonl", "comparison.svg",
        "evaluate.manifest.json"}},
      {"viz", "viz" + in + " --max-size 24",
       {"heatmap.ppm", "viz.manifest.json"}},
  };

  bool all_zero_exits = true;
  bool all_identical = true;
  std::string mismatch;
  for (const StageRun& stage : stages) {
    fs::path a = scratch / ("det_a_" + stage.name);
    fs::path b = scratch / ("det_b_" + stage.name);
    int ra = testutil::run_cli(stage.args + " --out-dir " + a.string());
    int rb = testutil::run_cli(stage.args + " --out-dir " + b.string());
    if (ra != 0 || rb != 0) {
      all_zero_exits = false;
      mismatch = stage.name + " exited " + std::to_string(ra) + "/" +
                 std::to_string(rb);
      continue;
    }
    for (const std::string& artifact : stage.artifacts) {
      if (testutil::read_file((a / artifact).string()) !=
          testutil::read_file((b / artifact).string())) {
        all_identical = false;
        if (mismatch.empty()) mismatch = stage.name + "/" + artifact;
      }
    }
  }
  report(8, "stage determinism", all_zero_exits && all_identical,
         all_zero_exits && all_identical
             ? "5 stages rerun byte-identical"
             : "first mismatch: " + mismatch);

  // finiteness: the runs above all exited 0 (never 3), the trained model is
  // finite, the comparison metrics parse as finite numbers, and direct
  // training across the lambda range stays finite
  bool finite_ok = all_zero_exits;
  std::string finite_note = "exit 3 never observed";
  try {
    auto model =
        load_model((scratch / "det_a_train" / "model.emf").string());
    finite_ok = finite_ok && model.all_finite();
    auto reports = read_reports_csv(
        (scratch / "det_a_evaluate" / "comparison.csv").string());
    for (const EvalReport& r : reports) {
      finite_ok =
          finite_ok && std::isfinite(r.mae) && std::isfinite(r.dme);
    }
    auto stats = classify(compute_item_stats(ds));
    for (double lambda : {0.0, 0.01, 1.0}) {
      TrainConfig cfg;
      cfg.lambda = lambda;
      cfg.epochs = 5;
      cfg.d = 8;
      finite_ok = finite_ok && train_emf(ds, stats, cfg).all_finite();
    }
  } catch (const Error& e) {
    finite_ok = false;
    finite_note = e.what();
  }
  report(9, "finiteness", finite_ok, finite_note);
}

// ----------------------------------------------------- MovieLens criteria

const std::array<std::pair<const char*, int>, 10> kTopMovies = {{
    {"American Beauty", 1999},
    {"Star Wars: Episode IV - A New Hope", 1977},
    {"Star Wars: Episode V - The Empire Strikes Back", 1980},
    {"Raiders of the Lost Ark", 1981},
    {"Saving Private Ryan", 1998},
    {"Silence of the Lambs, The", 1991},
    {"Sixth Sense, The", 1999},
    {"Matrix, The", 1999},
    {"Schindler's List", 1993},
    {"Shawshank Redemption, The", 1994},
}};

void criterion_table1(const fs::path& dir, const fs::path& scratch) {
  auto start = std::chrono::steady_clock::now();
  fs::path out = scratch / "table1";
  int rc = testutil::run_cli(
      "emotion --format movielens --ratings " + (dir / "ratings.dat").string() +
      " --movies " + (dir / "movies.dat").string() + " --top 15 --out-dir " +
      out.string());
  if (rc != 0) {
    report(3, "most-emotional ranking recovers the expected titles", false,
           "emotion stage exited " + std::to_string(rc));
    return;
  }
  std::ifstream ranking((out / "ranking.csv").string());
  std::string line;
  std::getline(ranking, line);  // header
  int matches = 0;
  int rows = 0;
  while (std::getline(ranking, line)) {
    if (line.empty()) continue;
    ++rows;
    auto fields = csv_split(line);
    if (fields.size() < 2) continue;
    for (const auto& [title, year] : kTopMovies) {
      if (fields[0] == title && fields[1] == std::to_string(year)) {
        ++matches;
      }
    }
  }
  double elapsed = seconds_since(start);
  report(3, "most-emotional ranking recovers the expected titles",
         matches >= 6 && rows == 15 && elapsed < 120.0,
         std::to_string(matches) + " of 10 expected titles in the top 15, " +
             fmt(elapsed, 1) + "s");
}

void criteria_fairness_accuracy(const fs::path& dir) {
  auto start = std::chrono::steady_clock::now();
  auto full = parse_movielens((dir / "ratings.dat").string());
  auto sample = subsample(full.dataset, 100'000, derive_seed(7, "sample"));

  int emf_wins = 0;
  double mf_mae_sum = 0.0, emf_mae_sum = 0.0, random_mae_sum = 0.0;
  bool finite = true;
  const int top_k = 10;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    auto parts = split(sample, {0.2, derive_seed(seed, "split")});
    auto stats = classify(compute_item_stats(parts.train));
    auto users = users_of(parts.test);

    TrainConfig cfg;
    cfg.seed = seed;
    cfg.lambda = 0.0;
    auto mf_model = train_mf(parts.train, cfg);
    cfg.lambda = 0.01;
    auto emf_model = train_emf(parts.train, stats, cfg);
    ModelPredictor mf_pred(std::move(mf_model), "mf");
    ModelPredictor emf_pred(std::move(emf_model), "emf");
    RandomPredictor random_pred(derive_seed(seed, "random"),
                                parts.train.max_rating());

    double mf_dme =
        degree_of_matthew_effect(mf_pred, parts.train, users, top_k);
    double emf_dme =
        degree_of_matthew_effect(emf_pred, parts.train, users, top_k);
    if (emf_dme <= mf_dme) ++emf_wins;

    double mf_mae = mae(mf_pred, parts.test);
    double emf_mae = mae(emf_pred, parts.test);
    double random_mae = mae(random_pred, parts.test);
    mf_mae_sum += mf_mae;
    emf_mae_sum += emf_mae;
    random_mae_sum += random_mae;
    finite = finite && std::isfinite(mf_dme) && std::isfinite(emf_dme) &&
             std::isfinite(mf_mae) && std::isfinite(emf_mae) &&
             std::isfinite(random_mae);
  }
  double elapsed = seconds_since(start);
  report(4, "emotion training lowers the exposure skew",
         emf_wins >= 2 && finite && elapsed < 300.0,
         std::to_string(emf_wins) + " of 3 seeds, " + fmt(elapsed, 1) + "s");

  double mf_mean = mf_mae_sum / 3.0;
  double emf_mean = emf_mae_sum / 3.0;
  double random_mean = random_mae_sum / 3.0;
  double gap = std::fabs(emf_mean - mf_mean) / mf_mean;
  report(5, "error stays near the plain baseline",
         mf_mean < random_mean && emf_mean < random_mean && gap <= 0.25 &&
             finite && elapsed < 300.0,
         "mae mf " + fmt(mf_mean) + ", emf " + fmt(emf_mean) + ", random " +
             fmt(random_mean) + ", gap " + fmt(gap));
}

fs::path find_movielens(const std::string& flag_value) {
  std::vector<fs::path> candidates;
  if (!flag_value.empty()) candidates.emplace_back(flag_value);
  if (const char* env = std::getenv("MOVIELENS_1M_DIR")) {
    candidates.emplace_back(env);
  }
  candidates.emplace_back("/root/data/ml-1m");
  candidates.emplace_back("/root/proj/data/ml-1m");
  candidates.emplace_back("data/ml-1m");
  candidates.emplace_back("ml-1m");
  for (const fs::path& p : candidates) {
    if (fs::exists(p / "ratings.dat")) return p;
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  bool core_only = false;
  bool movielens_only = false;
  std::string movielens_flag;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--core") {
      core_only = true;
    } else if (arg == "--movielens-only") {
      movielens_only = true;
    } else if (arg == "--movielens" && i + 1 < argc) {
      movielens_flag = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--core | --movielens-only] "
                   "[--movielens <dir>]\n";
      return 2;
    }
  }

  fs::path movielens = find_movielens(movielens_flag);
  if (movielens_only && movielens.empty()) {
    std::cout << "SKIP criteria 3-5: MovieLens 1M not found "
                 "(set MOVIELENS_1M_DIR or pass --movielens <dir>)\n";
    return 77;
  }

  testutil::TempDir scratch("acceptance");
  if (!movielens_only) {
    criterion_gradient_oracle();
    criterion_es_oracle();
    criterion_reduction(scratch.path());
    criterion_dme_anchors();
    criteria_determinism_finiteness(scratch.path());
  }
  if (!core_only) {
    if (movielens.empty()) {
      std::cout << "SKIP criteria 3-5: MovieLens 1M not found "
                   "(set MOVIELENS_1M_DIR or pass --movielens <dir>)\n";
    } else {
      criterion_table1(movielens, scratch.path());
      criteria_fairness_accuracy(movielens);
    }
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
