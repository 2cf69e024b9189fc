#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "emorec/factorization.hpp"

namespace emorec {

// Anything that can score a (user, item) pair. External algorithms can be
// plugged into the evaluation harness through this interface.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual double predict(int user, int item) const = 0;
  virtual std::string name() const = 0;
};

class ModelPredictor : public Predictor {
 public:
  ModelPredictor(FactorModel model, std::string name);

  double predict(int user, int item) const override;
  std::string name() const override { return name_; }
  const FactorModel& model() const { return model_; }

 private:
  FactorModel model_;
  std::string name_;
  std::vector<double> user_norms_;
  std::vector<double> item_norms_;
};

// Uniform rating in [1, max_rating), deterministic per (seed, user, item)
// via stateless hashing so repeated evaluation sees the same predictions.
class RandomPredictor : public Predictor {
 public:
  RandomPredictor(std::uint64_t seed, double max_rating)
      : seed_(seed), max_rating_(max_rating) {}

  double predict(int user, int item) const override;
  std::string name() const override { return "random"; }

 private:
  std::uint64_t seed_;
  double max_rating_;
};

std::unique_ptr<Predictor> random_baseline(std::uint64_t seed,
                                           double max_rating);

}  // namespace emorec
