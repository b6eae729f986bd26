#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dyadsync/recording.hpp"
#include "dyadsync/stats.hpp"
#include "dyadsync/types.hpp"

namespace dyadsync {

inline constexpr std::size_t kFeatureCount = 6;

/// log mean power of the task window: (alpha, beta) x (C3, C4, Cz), laid out
/// as [alpha C3, alpha C4, alpha Cz, beta C3, beta C4, beta Cz].
using FeatureVector = std::array<double, kFeatureCount>;

/// Throws Errc::incomplete_montage when C3, C4 or Cz is missing and
/// Errc::degenerate_feature when a band power is zero.
FeatureVector extract_features(const Epoch& e);

/// Same features from an already-cut task window: `channels` holds C3, C4, Cz in that order.
FeatureVector extract_window_features(std::span<const std::vector<double>> channels, int fs);

struct TrainConfig {
  int epochs = 100;
  int batch_size = 128;
  double initial_lr = 0.001;
  double lr_decay = 0.8;  // multiply every `decay_every` epochs
  int decay_every = 10;
  std::uint64_t seed = 0;
};

/// Multinomial logistic regression on standardized features.
struct Model {
  std::vector<MotorClass> classes;                          // output index -> class
  std::vector<std::array<double, kFeatureCount + 1>> weights;  // per class, bias last
  FeatureVector feature_mean{};
  FeatureVector feature_std{};
  TrainConfig config;

  std::size_t class_count() const { return classes.size(); }
  std::size_t index_of(MotorClass c) const;
};

struct Prediction {
  MotorClass cls;
  std::size_t index;
  std::vector<double> probabilities;
};

Prediction predict(const Model& m, const FeatureVector& f);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> scores);

struct TrainResult {
  Model model;
  std::vector<double> epoch_losses;  // mean minibatch loss per epoch
  double initial_loss = 0.0;         // full-data loss before the first update
  double final_loss = 0.0;           // full-data loss after training
};

/// Minibatch gradient descent on mean cross-entropy with a step-decay learning
/// rate. Deterministic given cfg.seed. Throws Errc::degenerate_label for
/// single-class data and Errc::sample_size for fewer than 2k samples.
TrainResult train(std::span<const FeatureVector> features, std::span<const MotorClass> labels,
                  const TrainConfig& cfg = {});

/// Mean cross-entropy and its gradient w.r.t. `weights` (flattened k x 7,
/// row-major) on already-standardized rows.
double loss_and_gradient(std::span<const double> weights, std::size_t classes,
                         std::span<const FeatureVector> standardized, std::span<const std::size_t> targets,
                         std::vector<double>* gradient);

/// Stratified fold assignment: fold index per sample, class counts per fold
/// balanced and fold sizes differing by at most one. Throws Errc::fold when a
/// class has fewer than k samples.
std::vector<std::size_t> stratified_folds(std::span<const MotorClass> labels, std::size_t k, std::uint64_t seed);

struct FoldResult {
  std::size_t fold;
  std::size_t samples;
  double accuracy;
  double macro_f1;
};

struct CvReport {
  double mean_accuracy = 0.0;
  double macro_f1 = 0.0;  // from the confusion matrix pooled over folds
  std::vector<FoldResult> folds;
  std::vector<MotorClass> classes;
};

CvReport cross_validate(std::span<const FeatureVector> features, std::span<const MotorClass> labels,
                        std::size_t k = 10, const TrainConfig& cfg = {});

std::string model_to_json(const Model& m);
/// Throws Errc::io on malformed input.
Model model_from_json(const std::string& text);

}  // namespace dyadsync
