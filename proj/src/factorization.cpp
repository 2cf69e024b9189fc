#include "emorec/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "emorec/csv.hpp"
#include "emorec/errors.hpp"

namespace emorec {

namespace {

double norm_of(std::span<const double> vec) {
  double s = 0.0;
  for (double x : vec) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

bool finite_span(std::span<const double> vec) {
  for (double x : vec) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// Sign-preserving clamp of the dot product away from zero, relative to the
// norm product. Zero counts as positive so the clamp never produces 0.
double safe_dot(double t3, double t2, double cosine_floor) {
  double floor = cosine_floor * t2;
  double magnitude = std::max(std::fabs(t3), floor);
  return t3 < 0.0 ? -magnitude : magnitude;
}

}  // namespace

void TrainConfig::validate() const {
  if (d < 1) throw ConfigError("latent dimension must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(init_scale > 0.0)) throw ConfigError("init scale must be > 0");
  if (!(cosine_floor > 0.0) || cosine_floor >= 1.0) {
    throw ConfigError("cosine floor must lie in (0, 1)");
  }
  if (!(norm_floor > 0.0)) throw ConfigError("norm floor must be > 0");
}

double FactorModel::cosine(int i, int j) const {
  auto u = user_vec(i);
  auto v = item_vec(j);
  double t0 = std::max(norm_of(u), config.norm_floor);
  double t1 = std::max(norm_of(v), config.norm_floor);
  double c = dot(u, v) / (t0 * t1);
  return std::clamp(c, -1.0, 1.0);
}

double FactorModel::predict(int i, int j) const {
  return std::clamp(cosine(i, j) * max_rating, 1.0, max_rating);
}

bool FactorModel::all_finite() const {
  return finite_span(user_factors) && finite_span(item_factors);
}

FactorModel init_model(int n_users, int n_items, const TrainConfig& config,
                       double max_rating) {
  config.validate();
  if (n_users < 0 || n_items < 0) {
    throw ValidationError("negative model dimensions");
  }
  FactorModel model;
  model.d = config.d;
  model.n_users = n_users;
  model.n_items = n_items;
  model.max_rating = max_rating;
  model.config = config;
  model.user_factors.resize(static_cast<std::size_t>(n_users) * config.d);
  model.item_factors.resize(static_cast<std::size_t>(n_items) * config.d);
  Rng rng(derive_seed(config.seed, "init"));
  for (double& x : model.user_factors) {
    x = (1.0 - rng.unit()) * config.init_scale;  // (0, init_scale]
  }
  for (double& x : model.item_factors) {
    x = (1.0 - rng.unit()) * config.init_scale;
  }
  return model;
}

double cell_loss(std::span<const double> u, std::span<const double> v,
                 double scaled_rating, double lambda, double score_times_count,
                 PopClass cls, const TrainConfig& config) {
  double t0 = std::max(norm_of(u), config.norm_floor);
  double t1 = std::max(norm_of(v), config.norm_floor);
  double t2 = t0 * t1;
  double t3 = dot(u, v);
  double c = t3 / t2;
  double diff = scaled_rating - c;
  double loss = diff * diff;
  if (lambda != 0.0) {
    double b = lambda / score_times_count;
    if (cls == PopClass::Popular) {
      loss -= b * t2 / safe_dot(t3, t2, config.cosine_floor);
    } else {
      loss -= b * t3 / t2;
    }
  }
  return loss;
}

void cell_gradients(std::span<const double> u, std::span<const double> v,
                    double scaled_rating, double lambda,
                    double score_times_count, PopClass cls,
                    const TrainConfig& config, std::span<double> grad_u,
                    std::span<double> grad_v) {
  std::size_t d = u.size();
  double t0 = std::max(norm_of(u), config.norm_floor);
  double t1 = std::max(norm_of(v), config.norm_floor);
  double t2 = t0 * t1;
  double t3 = dot(u, v);
  double c = t3 / t2;

  // squared term: -2*(y - c) * dc/dw, with dc/du_k = v_k/t2 - t3*u_k/(t0^3 t1)
  double two_diff = 2.0 * (scaled_rating - c);
  double u_coeff = t3 / (t0 * t0 * t0 * t1);
  double v_coeff = t3 / (t0 * t1 * t1 * t1);
  for (std::size_t k = 0; k < d; ++k) {
    grad_u[k] = -two_diff * (v[k] / t2 - u_coeff * u[k]);
    grad_v[k] = -two_diff * (u[k] / t2 - v_coeff * v[k]);
  }

  const char* branch = "plain";
  if (lambda != 0.0) {
    double b = lambda / score_times_count;
    if (cls == PopClass::Popular) {
      branch = "popular";
      double t3s = safe_dot(t3, t2, config.cosine_floor);
      double t3s2 = t3s * t3s;
      for (std::size_t k = 0; k < d; ++k) {
        grad_u[k] -= b * (t1 * u[k] / (t0 * t3s) - t2 * v[k] / t3s2);
        grad_v[k] -= b * (t0 * v[k] / (t1 * t3s) - t2 * u[k] / t3s2);
      }
    } else {
      branch = "obscure";
      for (std::size_t k = 0; k < d; ++k) {
        grad_u[k] -= b * (v[k] / t2 - u_coeff * u[k]);
        grad_v[k] -= b * (u[k] / t2 - v_coeff * v[k]);
      }
    }
  }

  if (!finite_span(grad_u) || !finite_span(grad_v)) {
    throw NumericalError(std::string("non-finite gradient (") + branch +
                         " branch)");
  }
}

GradientPair emf_step_gradients(const FactorModel& model, int user, int item,
                                double rating, const ItemStats& stats,
                                double lambda) {
  GradientPair grads;
  grads.user.resize(model.d);
  grads.item.resize(model.d);
  double stc = 1.0;
  PopClass cls = PopClass::Obscure;
  if (lambda != 0.0) {
    stc = stats.score(item) * static_cast<double>(stats.count(item));
    cls = stats.cls(item);
  }
  cell_gradients(model.user_vec(user), model.item_vec(item),
                 rating / model.max_rating, lambda, stc, cls, model.config,
                 grads.user, grads.item);
  return grads;
}

bool ensure_nonzero_norm(std::span<double> vec, Rng& rng, double norm_floor,
                         double scale) {
  if (norm_of(vec) >= norm_floor) return false;
  for (double& x : vec) x = (1.0 - rng.unit()) * scale;
  return true;
}

namespace {

// Shared SGD loop. stats is consulted only when lambda != 0, so the lambda=0
// path executes the same instructions whether or not stats were supplied.
FactorModel run_sgd(const RatingDataset& train, const ItemStats* stats,
                    const TrainConfig& config, const EpochObserver& observer) {
  config.validate();
  if (train.empty()) throw ValidationError("cannot train on an empty dataset");
  if (config.lambda != 0.0) {
    if (!stats || !stats->classified()) {
      throw ValidationError("emotion training needs classified item stats");
    }
    if (stats->item_count() != train.item_count()) {
      throw ValidationError("item stats were built for a different dataset");
    }
  }

  FactorModel model = init_model(train.user_count(), train.item_count(), config,
                                 train.max_rating());
  const auto& triples = train.triples();
  std::vector<std::size_t> order(triples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
  Rng jitter_rng(derive_seed(config.seed, "jitter"));
  std::vector<double> grad_u(config.d);
  std::vector<double> grad_v(config.d);
  double jitter_scale = config.init_scale / 100.0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, shuffle_rng);
    for (std::size_t step = 0; step < order.size(); ++step) {
      const Rating& r = triples[order[step]];
      std::span<double> u{
          model.user_factors.data() + static_cast<std::size_t>(r.user) * config.d,
          static_cast<std::size_t>(config.d)};
      std::span<double> v{
          model.item_factors.data() + static_cast<std::size_t>(r.item) * config.d,
          static_cast<std::size_t>(config.d)};

      double stc = 1.0;
      PopClass cls = PopClass::Obscure;
      if (config.lambda != 0.0) {
        stc = stats->score(r.item) * static_cast<double>(stats->count(r.item));
        cls = stats->cls(r.item);
      }
      try {
        cell_gradients(u, v, r.value / model.max_rating, config.lambda, stc,
                       cls, config, grad_u, grad_v);
      } catch (const NumericalError& e) {
        throw NumericalError("epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(step) + ": " + e.what());
      }
      // Both gradients come from the pre-step factors; apply together.
      for (int k = 0; k < config.d; ++k) {
        u[k] -= config.learning_rate * grad_u[k];
        v[k] -= config.learning_rate * grad_v[k];
      }
      if (!finite_span(u) || !finite_span(v)) {
        throw NumericalError("epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(step) + ": factors diverged");
      }
      ensure_nonzero_norm(u, jitter_rng, config.norm_floor, jitter_scale);
      ensure_nonzero_norm(v, jitter_rng, config.norm_floor, jitter_scale);
    }
    if (observer) observer(epoch, model);
  }
  return model;
}

}  // namespace

FactorModel train_mf(const RatingDataset& train, TrainConfig config,
                     const EpochObserver& observer) {
  config.lambda = 0.0;
  return run_sgd(train, nullptr, config, observer);
}

FactorModel train_emf(const RatingDataset& train, const ItemStats& stats,
                      TrainConfig config, const EpochObserver& observer) {
  return run_sgd(train, &stats, config, observer);
}

double total_loss(const FactorModel& model, const RatingDataset& data,
                  const ItemStats* stats, double lambda) {
  if (lambda != 0.0 && (!stats || !stats->classified())) {
    throw ValidationError("loss with lambda != 0 needs classified item stats");
  }
  double sum = 0.0;
  for (const Rating& r : data.triples()) {
    double stc = 1.0;
    PopClass cls = PopClass::Obscure;
    if (lambda != 0.0) {
      stc = stats->score(r.item) * static_cast<double>(stats->count(r.item));
      cls = stats->cls(r.item);
    }
    sum += cell_loss(model.user_vec(r.user), model.item_vec(r.item),
                     r.value / model.max_rating, lambda, stc, cls,
                     model.config);
  }
  return sum;
}

namespace {

constexpr char kMagic[8] = {'E', 'M', 'O', 'R', 'E', 'C', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
void read_pod(std::ifstream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof value);
}

}  // namespace

void save_model(const FactorModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kMagic, sizeof kMagic);
  write_pod(out, kVersion);
  write_pod(out, model.d);
  write_pod(out, model.n_users);
  write_pod(out, model.n_items);
  write_pod(out, model.max_rating);
  write_pod(out, model.config.d);
  write_pod(out, model.config.learning_rate);
  write_pod(out, model.config.lambda);
  write_pod(out, model.config.epochs);
  write_pod(out, model.config.seed);
  write_pod(out, model.config.init_scale);
  write_pod(out, model.config.cosine_floor);
  write_pod(out, model.config.norm_floor);
  out.write(reinterpret_cast<const char*>(model.user_factors.data()),
            static_cast<std::streamsize>(model.user_factors.size() *
                                         sizeof(double)));
  out.write(reinterpret_cast<const char*>(model.item_factors.data()),
            static_cast<std::streamsize>(model.item_factors.size() *
                                         sizeof(double)));
  if (!out) throw IoError("short write to " + path);
}

FactorModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ParseError(path + ": not a model file");
  }
  std::uint32_t version = 0;
  read_pod(in, version);
  if (version != kVersion) {
    throw ParseError(path + ": unsupported model version " +
                     std::to_string(version));
  }
  FactorModel model;
  read_pod(in, model.d);
  read_pod(in, model.n_users);
  read_pod(in, model.n_items);
  read_pod(in, model.max_rating);
  read_pod(in, model.config.d);
  read_pod(in, model.config.learning_rate);
  read_pod(in, model.config.lambda);
  read_pod(in, model.config.epochs);
  read_pod(in, model.config.seed);
  read_pod(in, model.config.init_scale);
  read_pod(in, model.config.cosine_floor);
  read_pod(in, model.config.norm_floor);
  if (!in || model.d < 1 || model.n_users < 0 || model.n_items < 0 ||
      model.d != model.config.d) {
    throw ParseError(path + ": corrupt model header");
  }
  model.user_factors.resize(static_cast<std::size_t>(model.n_users) * model.d);
  model.item_factors.resize(static_cast<std::size_t>(model.n_items) * model.d);
  in.read(reinterpret_cast<char*>(model.user_factors.data()),
          static_cast<std::streamsize>(model.user_factors.size() *
                                       sizeof(double)));
  in.read(reinterpret_cast<char*>(model.item_factors.data()),
          static_cast<std::streamsize>(model.item_factors.size() *
                                       sizeof(double)));
  if (!in) throw ParseError(path + ": truncated model file");
  in.peek();
  if (!in.eof()) throw ParseError(path + ": trailing bytes after model data");
  return model;
}

}  // namespace emorec
