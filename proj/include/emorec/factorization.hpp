#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "emorec/dataset.hpp"
#include "emorec/item_stats.hpp"
#include "emorec/rng.hpp"

namespace emorec {

struct TrainConfig {
  int d = 16;                    // latent dimension
  double learning_rate = 0.005;  // SGD step size
  double lambda = 0.01;          // emotion regularizer weight, >= 0
  int epochs = 20;
  std::uint64_t seed = 42;
  double init_scale = 0.1;       // entries start uniform in (0, init_scale]
  double cosine_floor = 1e-6;    // |u.v| is kept >= cosine_floor * |u||v|
  double norm_floor = 1e-12;     // vectors are floored/re-jittered below this

  void validate() const;  // throws ConfigError

  bool operator==(const TrainConfig&) const = default;
};

// Latent factors for the cosine-similarity rating model. The predicted
// affinity of user i and item j is cos(U_i, V_j); the predicted rating is
// that cosine rescaled by the rating ceiling and clamped to [1, max_rating].
struct FactorModel {
  int d = 0;
  int n_users = 0;
  int n_items = 0;
  double max_rating = 5.0;
  std::vector<double> user_factors;  // n_users x d, row-major
  std::vector<double> item_factors;  // n_items x d, row-major
  TrainConfig config;

  std::span<const double> user_vec(int i) const {
    return {user_factors.data() + static_cast<std::size_t>(i) * d,
            static_cast<std::size_t>(d)};
  }
  std::span<const double> item_vec(int j) const {
    return {item_factors.data() + static_cast<std::size_t>(j) * d,
            static_cast<std::size_t>(d)};
  }

  double cosine(int i, int j) const;   // clamped to [-1, 1]
  double predict(int i, int j) const;  // clamped to [1, max_rating]
  bool all_finite() const;
};

// Factors drawn uniformly from (0, init_scale], so every initial norm and
// dot product is strictly positive. Deterministic per seed.
FactorModel init_model(int n_users, int n_items, const TrainConfig& config,
                       double max_rating);

// ---------------------------------------------------------------------------
// Per-cell loss. With t0=|u|, t1=|v|, t2=t0*t1, t3=u.v, c=t3/t2 and
// scaled rating y=r/max_rating:
//
//   L = (y - c)^2 - lambda * ES(c)
//
// where the model-side emotional score substitutes the predicted cosine for
// the rating:
//   popular item:  ES = (1/c) / (score*count)  ->  -lambda*ES = -B * t2/t3
//   obscure item:  ES =  c    / (score*count)  ->  -lambda*ES = -B * t3/t2
// with B = lambda / (score*count). The popular branch divides by t3, which
// is kept away from zero by a sign-preserving clamp at cosine_floor * t2.
//
// Gradients are the exact derivatives of this expression. Writing
// dc/du = v/t2 - t3*u/(t0^3 t1) (and symmetrically for v):
//
//   squared term:   -2*(y - c) * dc/du
//   popular term:   -B * (t1*u/(t0*t3) - t2*v/t3^2)
//   obscure term:   -B * dc/du
// ---------------------------------------------------------------------------

double cell_loss(std::span<const double> u, std::span<const double> v,
                 double scaled_rating, double lambda, double score_times_count,
                 PopClass cls, const TrainConfig& config);

// Writes dL/du into grad_u and dL/dv into grad_v (overwrites). Throws
// NumericalError when a non-finite component appears, naming the branch.
void cell_gradients(std::span<const double> u, std::span<const double> v,
                    double scaled_rating, double lambda,
                    double score_times_count, PopClass cls,
                    const TrainConfig& config, std::span<double> grad_u,
                    std::span<double> grad_v);

struct GradientPair {
  std::vector<double> user;
  std::vector<double> item;
};

// Gradients of the cell loss at the model's current factors for one observed
// rating. The item must have classified stats.
GradientPair emf_step_gradients(const FactorModel& model, int user, int item,
                                double rating, const ItemStats& stats,
                                double lambda);

using EpochObserver = std::function<void(int epoch, const FactorModel&)>;

// Classic matrix factorization: SGD on the squared term alone over shuffled
// observed triples. Equivalent to train_emf with lambda = 0.
FactorModel train_mf(const RatingDataset& train, TrainConfig config,
                     const EpochObserver& observer = {});

// Emotion-regularized factorization. stats must be classified on the same
// training data. Updates are plain descent steps u -= lr * dL/du applied
// pairwise from the pre-step factors; vectors whose norm collapses below
// norm_floor are re-jittered with seeded noise at init_scale/100.
FactorModel train_emf(const RatingDataset& train, const ItemStats& stats,
                      TrainConfig config, const EpochObserver& observer = {});

// Sum of cell losses over the observed triples. stats may be null when
// lambda is 0.
double total_loss(const FactorModel& model, const RatingDataset& data,
                  const ItemStats* stats, double lambda);

// Replaces a near-zero vector with fresh uniform entries in (0, scale].
// Returns true when it fired.
bool ensure_nonzero_norm(std::span<double> vec, Rng& rng, double norm_floor,
                         double scale);

// Binary model file; round-trips bit-exactly. Layout documented in README.
void save_model(const FactorModel& model, const std::string& path);
FactorModel load_model(const std::string& path);

}  // namespace emorec
