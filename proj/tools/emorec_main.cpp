// Command-line front end: ingest -> emotion/train/evaluate/viz pipelines over
// rating logs, with a provenance manifest written next to every artifact.
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "emorec/csv.hpp"
#include "emorec/dataset.hpp"
#include "emorec/emotion.hpp"
#include "emorec/errors.hpp"
#include "emorec/evaluation.hpp"
#include "emorec/factorization.hpp"
#include "emorec/heatmap.hpp"
#include "emorec/item_stats.hpp"
#include "emorec/manifest.hpp"
#include "emorec/predictor.hpp"
#include "emorec/rng.hpp"

namespace fs = std::filesystem;
using namespace emorec;

namespace {

void info(const std::string& message) {
  std::cerr << "INFO: " << message << '\n';
}

void warn(const std::string& message) {
  std::cerr << "WARNING: " << message << '\n';
}

struct InputOpts {
  std::string format = "csv";
  std::string ratings;
  std::string movies;
  std::string user_col = "user_id";
  std::string item_col = "item_id";
  std::string rating_col = "rating";
  std::string delimiter = ",";
  double max_rating = 5.0;
};

void add_input_options(CLI::App* cmd, InputOpts& o) {
  cmd->add_option("--format", o.format, "input format")
      ->check(CLI::IsMember({"csv", "movielens"}))
      ->capture_default_str();
  cmd->add_option("--ratings", o.ratings, "ratings file")->required();
  cmd->add_option("--movies", o.movies,
                  "item catalog (movielens format only)");
  cmd->add_option("--user-col", o.user_col, "user id column (csv)")
      ->capture_default_str();
  cmd->add_option("--item-col", o.item_col, "item id column (csv)")
      ->capture_default_str();
  cmd->add_option("--rating-col", o.rating_col, "rating column (csv)")
      ->capture_default_str();
  cmd->add_option("--delimiter", o.delimiter, "csv field delimiter")
      ->capture_default_str();
  cmd->add_option("--max-rating", o.max_rating, "rating scale ceiling")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

MovielensData load_input(const InputOpts& o) {
  if (o.format == "movielens") {
    if (o.max_rating != 5.0) {
      throw ConfigError("--max-rating is fixed at 5 for movielens input");
    }
    return parse_movielens(o.ratings, o.movies);
  }
  if (!o.movies.empty()) {
    throw ConfigError("--movies requires --format movielens");
  }
  if (o.delimiter.size() != 1) {
    throw ConfigError("--delimiter must be a single character");
  }
  ColumnSpec spec;
  spec.user_column = o.user_col;
  spec.item_column = o.item_col;
  spec.rating_column = o.rating_col;
  spec.delimiter = o.delimiter[0];
  spec.max_rating = o.max_rating;
  return {parse_csv_ratings(o.ratings, spec), {}};
}

void describe(const RatingDataset& ds) {
  info(std::to_string(ds.triples().size()) + " ratings, " +
       std::to_string(ds.user_count()) + " users, " +
       std::to_string(ds.item_count()) + " items");
  if (ds.duplicates_resolved() > 0) {
    warn(std::to_string(ds.duplicates_resolved()) +
         " duplicate (user,item) pairs resolved keep-last");
  }
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path out(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + dir);
  return out;
}

void record_inputs(RunManifest& m, const InputOpts& o) {
  m.inputs.emplace_back(o.ratings,
                        "fnv1a64:" + hex64(fnv1a64_file(o.ratings)));
  if (!o.movies.empty()) {
    m.inputs.emplace_back(o.movies,
                          "fnv1a64:" + hex64(fnv1a64_file(o.movies)));
  }
}

void record_input_flags(RunManifest& m, const InputOpts& o) {
  m.flags.emplace_back("format", o.format);
  m.flags.emplace_back("ratings", o.ratings);
  if (!o.movies.empty()) m.flags.emplace_back("movies", o.movies);
  if (o.format == "csv") {
    m.flags.emplace_back("user-col", o.user_col);
    m.flags.emplace_back("item-col", o.item_col);
    m.flags.emplace_back("rating-col", o.rating_col);
    m.flags.emplace_back("delimiter", o.delimiter);
  }
  m.flags.emplace_back("max-rating", format_double(o.max_rating));
}

void record_train_flags(RunManifest& m, const TrainConfig& c) {
  m.flags.emplace_back("dim", std::to_string(c.d));
  m.flags.emplace_back("lr", format_double(c.learning_rate));
  m.flags.emplace_back("lambda", format_double(c.lambda));
  m.flags.emplace_back("epochs", std::to_string(c.epochs));
  m.flags.emplace_back("seed", std::to_string(c.seed));
  m.flags.emplace_back("init-scale", format_double(c.init_scale));
}

void record_train_seeds(RunManifest& m, std::uint64_t master) {
  m.seeds.emplace_back("master", master);
  m.seeds.emplace_back("init", derive_seed(master, "init"));
  m.seeds.emplace_back("shuffle", derive_seed(master, "shuffle"));
  m.seeds.emplace_back("jitter", derive_seed(master, "jitter"));
}

// ---------------------------------------------------------------------- ingest

struct IngestOpts {
  InputOpts in;
  std::uint64_t sample = 0;
  std::uint64_t seed = 42;
  std::string out_dir;
};

void run_ingest(const IngestOpts& o) {
  fs::path out = prepare_out_dir(o.out_dir);
  MovielensData data = load_input(o.in);
  describe(data.dataset);
  if (o.sample > 0 && o.sample < data.dataset.triples().size()) {
    data.dataset =
        subsample(data.dataset, o.sample, derive_seed(o.seed, "sample"));
    info("sampled down to " + std::to_string(data.dataset.triples().size()) +
         " ratings");
  }
  write_triples_csv(data.dataset, (out / "triples.csv").string());

  RunManifest m;
  m.subcommand = "ingest";
  record_input_flags(m, o.in);
  m.flags.emplace_back("sample", std::to_string(o.sample));
  m.flags.emplace_back("seed", std::to_string(o.seed));
  m.seeds.emplace_back("master", o.seed);
  if (o.sample > 0) {
    m.seeds.emplace_back("sample", derive_seed(o.seed, "sample"));
  }
  record_inputs(m, o.in);
  m.outputs = {"triples.csv"};
  m.write((out / "ingest.manifest.json").string());
}

// --------------------------------------------------------------------- emotion

struct EmotionOpts {
  InputOpts in;
  double score_q = 0.5;
  double count_q = 0.5;
  int top = 10;
  std::string rank_mode = "dense";
  bool rank_raw = false;
  std::string out_dir;
};

void run_emotion(const EmotionOpts& o) {
  fs::path out = prepare_out_dir(o.out_dir);
  MovielensData data = load_input(o.in);
  describe(data.dataset);
  ItemStats stats = classify(compute_item_stats(data.dataset),
                             {o.score_q, o.count_q});
  info("thresholds: score >= " + format_double(stats.score_threshold()) +
       ", count >= " + format_double(stats.count_threshold()));
  EmotionMatrix matrix = build_emotion_matrix(data.dataset, stats);

  RankOptions ro;
  ro.k = o.top;
  ro.observed_mean = o.rank_mode == "observed";
  ro.use_raw = o.rank_raw;
  auto ranking = rank_emotional_items(
      matrix, data.dataset, data.catalog.empty() ? nullptr : &data.catalog, ro);

  write_item_stats_csv(stats, data.dataset, (out / "item_stats.csv").string());
  write_emotion_csv(matrix, data.dataset,
                    (out / "emotion_scores.csv").string());
  write_ranking_csv(ranking, (out / "ranking.csv").string());

  RunManifest m;
  m.subcommand = "emotion";
  record_input_flags(m, o.in);
  m.flags.emplace_back("score-quantile", format_double(o.score_q));
  m.flags.emplace_back("count-quantile", format_double(o.count_q));
  m.flags.emplace_back("top", std::to_string(o.top));
  m.flags.emplace_back("rank-mode", o.rank_mode);
  m.flags.emplace_back("rank-raw", o.rank_raw ? "true" : "false");
  record_inputs(m, o.in);
  m.outputs = {"emotion_scores.csv", "item_stats.csv", "ranking.csv"};
  m.write((out / "emotion.manifest.json").string());
}

// ----------------------------------------------------------------------- train

struct TrainOpts {
  InputOpts in;
  std::string algo = "emf";
  TrainConfig cfg;
  double score_q = 0.5;
  double count_q = 0.5;
  std::string out_dir;
};

void run_train(const TrainOpts& o) {
  fs::path out = prepare_out_dir(o.out_dir);
  MovielensData data = load_input(o.in);
  describe(data.dataset);

  FactorModel model;
  double loss = 0.0;
  if (o.algo == "mf") {
    model = train_mf(data.dataset, o.cfg);
    loss = total_loss(model, data.dataset, nullptr, 0.0);
  } else {
    ItemStats stats = classify(compute_item_stats(data.dataset),
                               {o.score_q, o.count_q});
    model = train_emf(data.dataset, stats, o.cfg);
    loss = total_loss(model, data.dataset, &stats, o.cfg.lambda);
  }
  info("trained " + o.algo + " (d=" + std::to_string(model.d) + ", epochs=" +
       std::to_string(model.config.epochs) + "), total loss " +
       format_double(loss));
  save_model(model, (out / "model.emf").string());

  RunManifest m;
  m.subcommand = "train";
  record_input_flags(m, o.in);
  m.flags.emplace_back("algo", o.algo);
  record_train_flags(m, o.cfg);
  if (o.algo == "emf") {
    m.flags.emplace_back("score-quantile", format_double(o.score_q));
    m.flags.emplace_back("count-quantile", format_double(o.count_q));
  }
  record_train_seeds(m, o.cfg.seed);
  record_inputs(m, o.in);
  m.outputs = {"model.emf"};
  m.write((out / "train.manifest.json").string());
}

// -------------------------------------------------------------------- evaluate

struct EvalOpts {
  InputOpts in;
  std::vector<std::string> algos = {"mf", "emf", "random"};
  std::vector<double> lambda_grid;
  TrainConfig cfg;
  double score_q = 0.5;
  double count_q = 0.5;
  int top_k = 10;
  double test_fraction = 0.2;
  std::string dme_users = "test";
  std::string dataset_id;
  std::string out_dir;
};

void run_evaluate(const EvalOpts& o) {
  fs::path out = prepare_out_dir(o.out_dir);
  MovielensData data = load_input(o.in);
  describe(data.dataset);

  SplitSpec ss;
  ss.test_fraction = o.test_fraction;
  ss.seed = derive_seed(o.cfg.seed, "split");
  SplitResult halves = split(data.dataset, ss);
  info("split: " + std::to_string(halves.train.triples().size()) +
       " train / " + std::to_string(halves.test.triples().size()) + " test");

  ComparisonConfig cc;
  cc.train = o.cfg;
  cc.lambda_grid = o.lambda_grid;
  cc.thresholds = {o.score_q, o.count_q};
  cc.top_k = o.top_k;
  cc.dme_all_users = o.dme_users == "all";
  cc.dataset_id = o.dataset_id.empty()
                      ? fs::path(o.in.ratings).filename().string()
                      : o.dataset_id;
  ComparisonOutcome outcome =
      run_comparison(halves.train, halves.test, o.algos, cc);
  for (const auto& [algo, message] : outcome.failures) {
    warn(algo + ": " + message);
  }
  if (outcome.reports.empty()) {
    throw ValidationError("every algorithm failed; see warnings above");
  }
  for (const EvalReport& r : outcome.reports) {
    info(r.algorithm + " (lambda=" + format_double(r.lambda) + "): mae " +
         format_double(r.mae) + ", dme " + format_double(r.dme));
  }

  emit_comparison_plot_data(outcome.reports, (out / "comparison.svg").string(),
                            (out / "comparison.csv").string());
  write_reports_jsonl(outcome.reports, (out / "comparison.jsonl").string());

  RunManifest m;
  m.subcommand = "evaluate";
  record_input_flags(m, o.in);
  std::string algos_joined;
  for (const std::string& a : o.algos) {
    if (!algos_joined.empty()) algos_joined += ',';
    algos_joined += a;
  }
  m.flags.emplace_back("algos", algos_joined);
  std::string grid_joined;
  for (double l : o.lambda_grid) {
    if (!grid_joined.empty()) grid_joined += ',';
    grid_joined += format_double(l);
  }
  if (!grid_joined.empty()) m.flags.emplace_back("lambda-grid", grid_joined);
  record_train_flags(m, o.cfg);
  m.flags.emplace_back("score-quantile", format_double(o.score_q));
  m.flags.emplace_back("count-quantile", format_double(o.count_q));
  m.flags.emplace_back("top-k", std::to_string(o.top_k));
  m.flags.emplace_back("test-fraction", format_double(o.test_fraction));
  m.flags.emplace_back("dme-users", o.dme_users);
  m.flags.emplace_back("dataset-id", cc.dataset_id);
  record_train_seeds(m, o.cfg.seed);
  m.seeds.emplace_back("split", derive_seed(o.cfg.seed, "split"));
  m.seeds.emplace_back("random", derive_seed(o.cfg.seed, "random"));
  record_inputs(m, o.in);
  m.outputs = {"comparison.csv", "comparison.jsonl", "comparison.svg"};
  m.write((out / "evaluate.manifest.json").string());
}

// ------------------------------------------------------------------------- viz

struct VizOpts {
  InputOpts in;
  double score_q = 0.5;
  double count_q = 0.5;
  std::string pooling = "mean";
  int max_size = 1024;
  std::string colormap = "viridis";
  bool separate_observed = false;
  bool sort_users = false;
  std::string out_dir;
};

void run_viz(const VizOpts& o) {
  fs::path out = prepare_out_dir(o.out_dir);
  MovielensData data = load_input(o.in);
  describe(data.dataset);
  ItemStats stats = classify(compute_item_stats(data.dataset),
                             {o.score_q, o.count_q});
  EmotionMatrix matrix = build_emotion_matrix(data.dataset, stats);

  RasterSpec spec;
  spec.max_width = o.max_size;
  spec.max_height = o.max_size;
  spec.colormap = colormap_by_name(o.colormap);
  spec.pooling = o.pooling == "max" ? Pooling::Max : Pooling::Mean;
  spec.separate_observed = o.separate_observed;
  spec.sort_users_by_count = o.sort_users;
  render_heatmap(matrix, spec, (out / "heatmap.ppm").string());
  HeatGrid grid = grid_from_matrix(matrix, spec);
  info("rendered " + std::to_string(grid.cols) + "x" +
       std::to_string(grid.rows) + " heatmap (" +
       std::to_string(grid.cells.size()) + " observed buckets)");

  RunManifest m;
  m.subcommand = "viz";
  record_input_flags(m, o.in);
  m.flags.emplace_back("score-quantile", format_double(o.score_q));
  m.flags.emplace_back("count-quantile", format_double(o.count_q));
  m.flags.emplace_back("pooling", o.pooling);
  m.flags.emplace_back("max-size", std::to_string(o.max_size));
  m.flags.emplace_back("colormap", o.colormap);
  m.flags.emplace_back("separate-observed",
                       o.separate_observed ? "true" : "false");
  m.flags.emplace_back("sort-users", o.sort_users ? "true" : "false");
  record_inputs(m, o.in);
  m.outputs = {"heatmap.ppm"};
  m.write((out / "viz.manifest.json").string());
}

void add_quantile_options(CLI::App* cmd, double& score_q, double& count_q) {
  cmd->add_option("--score-quantile", score_q,
                  "popularity cutoff quantile for mean rating")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--count-quantile", count_q,
                  "popularity cutoff quantile for rating count")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

void add_train_options(CLI::App* cmd, TrainConfig& cfg) {
  cmd->add_option("--dim", cfg.d, "latent dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--lr", cfg.learning_rate, "SGD learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--lambda", cfg.lambda, "emotion regularizer weight")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--epochs", cfg.epochs, "training epochs")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  cmd->add_option("--init-scale", cfg.init_scale, "initial factor magnitude")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"emotional-score toolkit for rating logs"};
  app.require_subcommand(1);
  app.set_config("--config");

  IngestOpts ingest;
  auto* ingest_cmd = app.add_subcommand(
      "ingest", "normalize a rating log into canonical triples");
  add_input_options(ingest_cmd, ingest.in);
  ingest_cmd->add_option("--sample", ingest.sample,
                         "keep only this many ratings (0 = all)")
      ->capture_default_str();
  ingest_cmd->add_option("--seed", ingest.seed, "sampling seed")
      ->capture_default_str();
  ingest_cmd->add_option("--out-dir", ingest.out_dir, "output directory")
      ->required();
  ingest_cmd->callback([&] { run_ingest(ingest); });

  EmotionOpts emotion;
  auto* emotion_cmd = app.add_subcommand(
      "emotion", "score emotions and rank the most emotional items");
  add_input_options(emotion_cmd, emotion.in);
  add_quantile_options(emotion_cmd, emotion.score_q, emotion.count_q);
  emotion_cmd->add_option("--top", emotion.top, "ranking length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  emotion_cmd
      ->add_option("--rank-mode", emotion.rank_mode,
                   "mean over all users (dense) or raters only (observed)")
      ->check(CLI::IsMember({"dense", "observed"}))
      ->capture_default_str();
  emotion_cmd->add_flag("--rank-raw", emotion.rank_raw,
                        "rank on raw scores instead of normalized");
  emotion_cmd->add_option("--out-dir", emotion.out_dir, "output directory")
      ->required();
  emotion_cmd->callback([&] { run_emotion(emotion); });

  TrainOpts train;
  auto* train_cmd =
      app.add_subcommand("train", "fit latent factors on a rating log");
  add_input_options(train_cmd, train.in);
  train_cmd->add_option("--algo", train.algo, "training algorithm")
      ->check(CLI::IsMember({"mf", "emf"}))
      ->capture_default_str();
  add_train_options(train_cmd, train.cfg);
  add_quantile_options(train_cmd, train.score_q, train.count_q);
  train_cmd->add_option("--out-dir", train.out_dir, "output directory")
      ->required();
  train_cmd->callback([&] { run_train(train); });

  EvalOpts evaluate;
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "split, train, and compare algorithms on error and bias");
  eval_cmd->alias("compare");
  add_input_options(eval_cmd, evaluate.in);
  eval_cmd->add_option("--algos", evaluate.algos, "algorithms to compare")
      ->delimiter(',')
      ->check(CLI::IsMember({"mf", "emf", "random"}))
      ->capture_default_str();
  eval_cmd
      ->add_option("--lambda-grid", evaluate.lambda_grid,
                   "emf lambda values to sweep")
      ->delimiter(',');
  add_train_options(eval_cmd, evaluate.cfg);
  add_quantile_options(eval_cmd, evaluate.score_q, evaluate.count_q);
  eval_cmd->add_option("--top-k", evaluate.top_k, "recommendations per user")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd
      ->add_option("--test-fraction", evaluate.test_fraction,
                   "held-out fraction")
      ->capture_default_str();
  eval_cmd
      ->add_option("--dme-users", evaluate.dme_users,
                   "users ranked for the Matthew-effect degree")
      ->check(CLI::IsMember({"test", "all"}))
      ->capture_default_str();
  eval_cmd->add_option("--dataset-id", evaluate.dataset_id,
                       "label recorded in reports");
  eval_cmd->add_option("--out-dir", evaluate.out_dir, "output directory")
      ->required();
  eval_cmd->callback([&] { run_evaluate(evaluate); });

  VizOpts viz;
  auto* viz_cmd =
      app.add_subcommand("viz", "render the emotion matrix as a heatmap");
  add_input_options(viz_cmd, viz.in);
  add_quantile_options(viz_cmd, viz.score_q, viz.count_q);
  viz_cmd->add_option("--pooling", viz.pooling, "block pooling for big grids")
      ->check(CLI::IsMember({"mean", "max"}))
      ->capture_default_str();
  viz_cmd->add_option("--max-size", viz.max_size, "raster bound per side")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  viz_cmd->add_option("--colormap", viz.colormap, "viridis, heat, or gray")
      ->capture_default_str();
  viz_cmd->add_flag("--separate-observed", viz.separate_observed,
                    "keep observed minimum above the missing-cell color");
  viz_cmd->add_flag("--sort-users", viz.sort_users,
                    "order rows by rating count");
  viz_cmd->add_option("--out-dir", viz.out_dir, "output directory")
      ->required();
  viz_cmd->callback([&] { run_viz(viz); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "ERROR: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "ERROR: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "ERROR: unexpected: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
