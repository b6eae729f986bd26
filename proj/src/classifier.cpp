#include "dyadsync/classifier.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include "json.hpp"
#include <numeric>
#include <random>

#include "dyadsync/error.hpp"
#include "dyadsync/filter.hpp"

namespace dyadsync {

namespace {

constexpr std::size_t kParams = kFeatureCount + 1;

double log_power(std::span<const double> x, const FilterCoefficients& coeffs, Electrode e) {
  const auto y = apply_filter_zero_phase(coeffs, x);
  double ss = 0.0;
  for (double v : y) ss += v * v;
  const double p = ss / static_cast<double>(y.size());
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw Error(Errc::degenerate_feature, fmt::format("zero band power on {}", to_string(e)));
  }
  return std::log(p);
}

FeatureVector standardize(const FeatureVector& f, const FeatureVector& mean, const FeatureVector& sd) {
  FeatureVector z{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) z[i] = (f[i] - mean[i]) / sd[i];
  return z;
}

}  // namespace

FeatureVector extract_window_features(std::span<const std::vector<double>> channels, int fs) {
  if (channels.size() != kMotorChannels.size()) {
    throw Error(Errc::incomplete_montage, fmt::format("features need C3, C4, Cz; got {} channels", channels.size()));
  }
  const auto alpha = design_bandpass(FrequencyBand::named(BandName::alpha), fs);
  const auto beta = design_bandpass(FrequencyBand::named(BandName::beta), fs);
  FeatureVector f{};
  for (std::size_t c = 0; c < kMotorChannels.size(); ++c) {
    f[c] = log_power(channels[c], alpha, kMotorChannels[c]);
    f[3 + c] = log_power(channels[c], beta, kMotorChannels[c]);
  }
  return f;
}

FeatureVector extract_features(const Epoch& e) {
  const auto r = state_range(BrainState::task, e.sample_rate);
  if (e.samples() < r.end) throw Error(Errc::truncated_trial, fmt::format("trial {} is too short", e.trial_index));
  std::vector<std::vector<double>> window;
  for (Electrode ch : kMotorChannels) {
    const auto x = e.channel(ch);
    window.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(r.begin), x.begin() + static_cast<std::ptrdiff_t>(r.end));
  }
  return extract_window_features(window, e.sample_rate);
}

std::size_t Model::index_of(MotorClass c) const {
  const auto it = std::find(classes.begin(), classes.end(), c);
  if (it == classes.end()) throw Error(Errc::invalid_argument, fmt::format("model has no class {}", to_string(c)));
  return static_cast<std::size_t>(it - classes.begin());
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> p(scores.begin(), scores.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (auto& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : p) v /= sum;
  return p;
}

Prediction predict(const Model& m, const FeatureVector& f) {
  const auto z = standardize(f, m.feature_mean, m.feature_std);
  std::vector<double> scores(m.class_count());
  for (std::size_t k = 0; k < m.class_count(); ++k) {
    double s = m.weights[k][kFeatureCount];
    for (std::size_t i = 0; i < kFeatureCount; ++i) s += m.weights[k][i] * z[i];
    scores[k] = s;
  }
  Prediction p;
  p.probabilities = softmax(scores);
  p.index = static_cast<std::size_t>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                                     p.probabilities.begin());
  p.cls = m.classes[p.index];
  return p;
}

double loss_and_gradient(std::span<const double> weights, std::size_t classes,
                         std::span<const FeatureVector> standardized, std::span<const std::size_t> targets,
                         std::vector<double>* gradient) {
  if (weights.size() != classes * kParams) throw Error(Errc::shape_mismatch, "weight vector has the wrong size");
  if (gradient) gradient->assign(weights.size(), 0.0);
  double loss = 0.0;
  std::vector<double> scores(classes);
  for (std::size_t n = 0; n < standardized.size(); ++n) {
    const auto& x = standardized[n];
    for (std::size_t k = 0; k < classes; ++k) {
      const double* w = weights.data() + k * kParams;
      double s = w[kFeatureCount];
      for (std::size_t i = 0; i < kFeatureCount; ++i) s += w[i] * x[i];
      scores[k] = s;
    }
    const double mx = *std::max_element(scores.begin(), scores.end());
    double lse = 0.0;
    for (double s : scores) lse += std::exp(s - mx);
    lse = mx + std::log(lse);
    loss += lse - scores[targets[n]];
    if (gradient) {
      for (std::size_t k = 0; k < classes; ++k) {
        const double r = std::exp(scores[k] - lse) - (k == targets[n] ? 1.0 : 0.0);
        double* g = gradient->data() + k * kParams;
        for (std::size_t i = 0; i < kFeatureCount; ++i) g[i] += r * x[i];
        g[kFeatureCount] += r;
      }
    }
  }
  const double inv = standardized.empty() ? 0.0 : 1.0 / static_cast<double>(standardized.size());
  if (gradient) {
    for (auto& g : *gradient) g *= inv;
  }
  return loss * inv;
}

TrainResult train(std::span<const FeatureVector> features, std::span<const MotorClass> labels, const TrainConfig& cfg) {
  if (features.size() != labels.size()) throw Error(Errc::shape_mismatch, "features and labels differ in length");
  if (cfg.epochs <= 0 || cfg.batch_size <= 0 || !(cfg.initial_lr > 0.0) || !(cfg.lr_decay > 0.0) ||
      cfg.decay_every <= 0) {
    throw Error(Errc::invalid_argument, "training configuration values must be positive");
  }
  std::vector<MotorClass> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw Error(Errc::degenerate_label, "training data holds a single class");
  if (features.size() < 2 * classes.size()) {
    throw Error(Errc::sample_size, fmt::format("{} samples are too few for {} classes", features.size(), classes.size()));
  }

  TrainResult result;
  Model& m = result.model;
  m.classes = classes;
  m.config = cfg;
  for (const auto& f : features) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (!std::isfinite(f[i])) throw Error(Errc::degenerate_feature, "non-finite feature value");
    }
  }
  const double n = static_cast<double>(features.size());
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    double s = 0.0;
    for (const auto& f : features) s += f[i];
    m.feature_mean[i] = s / n;
    double ss = 0.0;
    for (const auto& f : features) ss += (f[i] - m.feature_mean[i]) * (f[i] - m.feature_mean[i]);
    const double sd = std::sqrt(ss / n);
    m.feature_std[i] = sd > 0.0 ? sd : 1.0;
  }
  std::vector<FeatureVector> z;
  std::vector<std::size_t> targets;
  for (std::size_t j = 0; j < features.size(); ++j) {
    z.push_back(standardize(features[j], m.feature_mean, m.feature_std));
    targets.push_back(m.index_of(labels[j]));
  }

  const std::size_t k = classes.size();
  std::vector<double> w(k * kParams, 0.0);
  std::vector<double> grad;
  result.initial_loss = loss_and_gradient(w, k, z, targets, nullptr);

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(z.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<FeatureVector> batch_x;
  std::vector<std::size_t> batch_y;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.initial_lr * std::pow(cfg.lr_decay, epoch / cfg.decay_every);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch_x.clear();
      batch_y.clear();
      for (std::size_t j = start; j < stop; ++j) {
        batch_x.push_back(z[order[j]]);
        batch_y.push_back(targets[order[j]]);
      }
      epoch_loss += loss_and_gradient(w, k, batch_x, batch_y, &grad);
      ++batches;
      for (std::size_t p = 0; p < w.size(); ++p) w[p] -= lr * grad[p];
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(batches));
  }
  result.final_loss = loss_and_gradient(w, k, z, targets, nullptr);

  m.weights.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy(w.begin() + static_cast<std::ptrdiff_t>(c * kParams),
              w.begin() + static_cast<std::ptrdiff_t>((c + 1) * kParams), m.weights[c].begin());
  }
  return result;
}

std::vector<std::size_t> stratified_folds(std::span<const MotorClass> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(Errc::fold, "cross-validation needs at least 2 folds");
  std::map<MotorClass, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [cls, idx] : by_class) {
    if (idx.size() < k) {
      throw Error(Errc::fold, fmt::format("class {} has {} samples, fewer than {} folds", to_string(cls), idx.size(), k));
    }
  }
  std::mt19937_64 rng(seed);
  // Deal class-grouped, shuffled samples round-robin so both fold sizes and
  // per-class counts differ by at most one.
  std::vector<std::size_t> folds(labels.size());
  std::size_t position = 0;
  for (auto& [cls, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (auto i : idx) folds[i] = position++ % k;
  }
  return folds;
}

CvReport cross_validate(std::span<const FeatureVector> features, std::span<const MotorClass> labels, std::size_t k,
                        const TrainConfig& cfg) {
  if (features.size() != labels.size()) throw Error(Errc::shape_mismatch, "features and labels differ in length");
  const auto folds = stratified_folds(labels, k, cfg.seed);
  CvReport report;
  report.classes.assign(labels.begin(), labels.end());
  std::sort(report.classes.begin(), report.classes.end());
  report.classes.erase(std::unique(report.classes.begin(), report.classes.end()), report.classes.end());
  if (report.classes.size() < 2) throw Error(Errc::degenerate_label, "cross-validation data holds a single class");

  auto class_pos = [&](MotorClass c) {
    return static_cast<std::size_t>(std::find(report.classes.begin(), report.classes.end(), c) - report.classes.begin());
  };
  ConfusionMatrix pooled(report.classes.size());
  double acc_sum = 0.0;
  for (std::size_t fold = 0; fold < k; ++fold) {
    std::vector<FeatureVector> train_x;
    std::vector<MotorClass> train_y;
    std::vector<std::size_t> held_out;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (folds[i] == fold) {
        held_out.push_back(i);
      } else {
        train_x.push_back(features[i]);
        train_y.push_back(labels[i]);
      }
    }
    const auto model = train(train_x, train_y, cfg).model;
    ConfusionMatrix cm(report.classes.size());
    for (auto i : held_out) cm.add(class_pos(labels[i]), class_pos(predict(model, features[i]).cls));
    pooled += cm;
    const double acc = cm.accuracy();
    acc_sum += acc;
    report.folds.push_back({fold, held_out.size(), acc, f1_scores(cm).macro});
  }
  report.mean_accuracy = acc_sum / static_cast<double>(k);
  report.macro_f1 = f1_scores(pooled).macro;
  return report;
}

std::string model_to_json(const Model& m) {
  nlohmann::ordered_json j;
  j["classes"] = nlohmann::json::array();
  for (auto c : m.classes) j["classes"].push_back(std::string(to_string(c)));
  j["weights"] = m.weights;
  j["feature_mean"] = m.feature_mean;
  j["feature_std"] = m.feature_std;
  j["config"] = {{"epochs", m.config.epochs},         {"batch_size", m.config.batch_size},
                 {"initial_lr", m.config.initial_lr}, {"lr_decay", m.config.lr_decay},
                 {"decay_every", m.config.decay_every}};
  j["seed"] = m.config.seed;
  return j.dump(2);
}

Model model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Model m;
    for (const auto& c : j.at("classes")) m.classes.push_back(ClassLabel::parse(c.get<std::string>()).hand());
    m.weights = j.at("weights").get<std::vector<std::array<double, kFeatureCount + 1>>>();
    m.feature_mean = j.at("feature_mean").get<FeatureVector>();
    m.feature_std = j.at("feature_std").get<FeatureVector>();
    const auto& c = j.at("config");
    m.config.epochs = c.at("epochs").get<int>();
    m.config.batch_size = c.at("batch_size").get<int>();
    m.config.initial_lr = c.at("initial_lr").get<double>();
    m.config.lr_decay = c.at("lr_decay").get<double>();
    m.config.decay_every = c.at("decay_every").get<int>();
    m.config.seed = j.at("seed").get<std::uint64_t>();
    if (m.weights.size() != m.classes.size() || m.classes.size() < 2) {
      throw Error(Errc::io, "model weights do not match its class list");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io, fmt::format("malformed model JSON: {}", e.what()));
  }
}

}  // namespace dyadsync
