#include "emorec/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "emorec/rng.hpp"

namespace emorec {

ModelPredictor::ModelPredictor(FactorModel model, std::string name)
    : model_(std::move(model)), name_(std::move(name)) {
  auto norms = [&](const std::vector<double>& factors, int rows,
                   std::vector<double>& out) {
    out.resize(rows);
    for (int i = 0; i < rows; ++i) {
      double s = 0.0;
      for (int k = 0; k < model_.d; ++k) {
        double x = factors[static_cast<std::size_t>(i) * model_.d + k];
        s += x * x;
      }
      out[i] = std::max(std::sqrt(s), model_.config.norm_floor);
    }
  };
  norms(model_.user_factors, model_.n_users, user_norms_);
  norms(model_.item_factors, model_.n_items, item_norms_);
}

double ModelPredictor::predict(int user, int item) const {
  const double* u =
      model_.user_factors.data() + static_cast<std::size_t>(user) * model_.d;
  const double* v =
      model_.item_factors.data() + static_cast<std::size_t>(item) * model_.d;
  double t3 = 0.0;
  for (int k = 0; k < model_.d; ++k) t3 += u[k] * v[k];
  double c = std::clamp(t3 / (user_norms_[user] * item_norms_[item]), -1.0, 1.0);
  return std::clamp(c * model_.max_rating, 1.0, model_.max_rating);
}

double RandomPredictor::predict(int user, int item) const {
  double u = hash_unit(seed_, static_cast<std::uint64_t>(user),
                       static_cast<std::uint64_t>(item));
  return 1.0 + u * (max_rating_ - 1.0);
}

std::unique_ptr<Predictor> random_baseline(std::uint64_t seed,
                                           double max_rating) {
  return std::make_unique<RandomPredictor>(seed, max_rating);
}

}  // namespace emorec
