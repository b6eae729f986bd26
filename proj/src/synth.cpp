#include "dyadsync/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dyadsync/error.hpp"
#include "dyadsync/fft.hpp"

namespace dyadsync {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kChannels = kMontage.size();

std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(salt)};
  return std::mt19937_64(seq);
}

double uniform_phase(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(-kPi, kPi)(rng); }

double wrap(double phi) { return std::remainder(phi, 2.0 * kPi); }

/// 1/f amplitude-shaped Gaussian noise scaled to `rms`.
std::vector<double> pink_noise(std::mt19937_64& rng, std::size_t n, double fs, double rms) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::complex<double>> white(n);
  for (auto& v : white) v = gauss(rng);
  auto spec = fft(white);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t bin = std::min(k, n - k);
    const double f = static_cast<double>(bin) * fs / static_cast<double>(n);
    spec[k] *= bin == 0 ? 0.0 : 1.0 / std::max(f, 1.0);
  }
  const auto shaped = ifft(spec);
  std::vector<double> out(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = shaped[i].real();
    ss += out[i] * out[i];
  }
  const double scale = ss > 0.0 ? rms / std::sqrt(ss / static_cast<double>(n)) : 0.0;
  for (auto& v : out) v *= scale;
  return out;
}

std::vector<ClassLabel> balanced_block(const std::vector<ClassLabel>& classes, int count, std::mt19937_64& rng) {
  std::vector<ClassLabel> order = classes;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<ClassLabel> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(order[static_cast<std::size_t>(i) % order.size()]);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace

std::vector<OscillatorSpec> default_oscillators() {
  return {
      {FrequencyBand::named(BandName::delta), 10.0, 2.0},  {FrequencyBand::named(BandName::theta), 5.0, 6.0},
      {FrequencyBand::named(BandName::alpha), 10.0, 10.0}, {FrequencyBand::named(BandName::beta), 5.0, 20.0},
      {FrequencyBand::named(BandName::gamma), 2.0, 40.0},
  };
}

CouplingSpec CouplingSpec::matched(double kappa, BandName band) {
  CouplingSpec c;
  c.kappa = kappa;
  c.band = band;
  for (Electrode e : kMontage) c.coupled_pairs.emplace_back(e, e);
  return c;
}

ErdMap ErdMap::none() {
  ErdMap m;
  for (std::size_t c = 0; c < 4; ++c) {
    m.specs_[c].cls = static_cast<MotorClass>(c);
    m.specs_[c].gains.fill(1.0);
  }
  return m;
}

ErdMap ErdMap::motor_imagery(double gain) {
  if (!(gain > 0.0)) throw Error(Errc::invalid_argument, fmt::format("ERD gain must be positive, got {}", gain));
  ErdMap m = none();
  auto attenuate = [&](MotorClass c, Electrode e) { m.specs_[static_cast<std::size_t>(c)].gains[montage_index(e)] = gain; };
  attenuate(MotorClass::left_hand, Electrode::C4);
  attenuate(MotorClass::right_hand, Electrode::C3);
  attenuate(MotorClass::tongue, Electrode::C3);
  attenuate(MotorClass::tongue, Electrode::C4);
  attenuate(MotorClass::foot, Electrode::Cz);
  return m;
}

void ErdMap::set(const ErdSpec& spec) {
  for (double g : spec.gains) {
    if (!(g > 0.0)) throw Error(Errc::invalid_argument, "ERD gains must be positive");
  }
  specs_[static_cast<std::size_t>(spec.cls)] = spec;
}

double sample_von_mises(std::mt19937_64& rng, double kappa) {
  if (kappa < 0.0) throw Error(Errc::invalid_argument, "von Mises concentration must be >= 0");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (kappa < 1e-8) return uniform_phase(rng);
  if (kappa > 1e3) {
    // Wrapped normal limit; Best-Fisher loses precision here.
    return wrap(std::normal_distribution<double>(0.0, 1.0 / std::sqrt(kappa))(rng));
  }
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double u1 = unit(rng);
    const double u2 = unit(rng);
    const double u3 = unit(rng);
    const double z = std::cos(kPi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double theta = std::acos(std::clamp(f, -1.0, 1.0));
      return u3 > 0.5 ? theta : -theta;
    }
  }
}

double von_mises_resultant(double kappa) {
  if (kappa <= 0.0) return 0.0;
  if (kappa > 500.0) return 1.0 - 1.0 / (2.0 * kappa) - 1.0 / (8.0 * kappa * kappa);
  return std::cyl_bessel_i(1.0, kappa) / std::cyl_bessel_i(0.0, kappa);
}

std::vector<DyadCue> balanced_cues(PhaseMode mode, int blocks, int trials_per_block, std::uint64_t seed) {
  if (blocks < 0 || trials_per_block < 0) throw Error(Errc::invalid_argument, "block counts must be non-negative");
  const std::vector<ClassLabel> hands{ClassLabel::single(MotorClass::left_hand),
                                      ClassLabel::single(MotorClass::right_hand)};
  const std::vector<ClassLabel> heads{ClassLabel::single(MotorClass::tongue), ClassLabel::single(MotorClass::foot)};
  std::vector<ClassLabel> pairs;
  for (auto h : {MotorClass::left_hand, MotorClass::right_hand})
    for (auto t : {MotorClass::tongue, MotorClass::foot}) pairs.push_back(ClassLabel::cooperative(h, t));

  std::vector<DyadCue> out;
  for (int blk = 0; blk < blocks; ++blk) {
    auto rng = derive_rng(seed, static_cast<std::uint64_t>(blk), 0xb10c);
    if (mode == PhaseMode::cooperative) {
      for (const auto& l : balanced_block(pairs, trials_per_block, rng)) out.push_back({l, l});
    } else {
      const auto a = balanced_block(hands, trials_per_block, rng);
      const auto b = balanced_block(heads, trials_per_block, rng);
      for (std::size_t i = 0; i < a.size(); ++i) out.push_back({a[i], b[i]});
    }
  }
  return out;
}

SessionPlan make_plan(PhaseMode mode, std::uint64_t seed, int blocks, int trials_per_block,
                      std::size_t first_trial_index) {
  SessionPlan p;
  p.mode = mode;
  p.blocks = blocks;
  p.trials_per_block = trials_per_block;
  p.seed = seed;
  p.first_trial_index = first_trial_index;
  p.cues = balanced_cues(mode, blocks, trials_per_block, seed);
  return p;
}

DyadEpochs generate_trial(const SessionPlan& plan, std::size_t trial, const CouplingSpec& coupling,
                          const ErdMap& erd, const SynthParams& params) {
  if (trial >= plan.cues.size()) throw Error(Errc::invalid_argument, fmt::format("plan has no trial {}", trial));
  if (coupling.kappa < 0.0) throw Error(Errc::invalid_argument, "coupling kappa must be >= 0");
  const std::size_t global_index = plan.first_trial_index + trial;
  auto rng = derive_rng(plan.seed, global_index, 0x7e1a);
  const int fs = params.sample_rate;
  const std::size_t n = epoch_samples(fs);
  const DyadCue& cue = plan.cues[trial];
  const std::array<MotorClass, 2> imagined{cue.a.for_slot(0), cue.b.for_slot(1)};

  // Crossfade weight: 0 in the rest part, 1 in the task part.
  std::vector<double> task_weight(n);
  const double fade_begin = params.transition_s - params.crossfade_s / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double u = params.crossfade_s > 0.0 ? std::clamp((t - fade_begin) / params.crossfade_s, 0.0, 1.0)
                                              : (t >= params.transition_s ? 1.0 : 0.0);
    task_weight[i] = 0.5 - 0.5 * std::cos(kPi * u);
  }

  std::array<Channels, 2> data;
  for (auto& d : data) d.assign(kChannels, std::vector<double>(n, 0.0));

  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const auto& osc : params.oscillators) {
    if (osc.center_hz < osc.band.low() || osc.center_hz > osc.band.high()) {
      throw Error(Errc::invalid_argument, "oscillator frequency outside its band");
    }
    // phase[subject][state][channel]: subject source -> ROI source -> channel
    std::array<std::array<std::array<double, kChannels>, 2>, 2> phase{};
    for (int s = 0; s < 2; ++s) {
      for (int w = 0; w < 2; ++w) {
        const double source = uniform_phase(rng);
        std::array<double, 3> roi_source{};
        for (auto& r : roi_source) r = source + sample_von_mises(rng, params.roi_kappa);
        for (std::size_t ch = 0; ch < kChannels; ++ch) {
          phase[s][w][ch] = wrap(roi_source[static_cast<std::size_t>(roi_of(kMontage[ch]))] +
                                 sample_von_mises(rng, params.channel_kappa));
        }
      }
    }
    if (osc.band.name() == coupling.band) {
      // One offset per trial shared by every coupled pair, so subject B keeps
      // its within-brain structure at any coupling strength.
      const double offset = sample_von_mises(rng, coupling.kappa);
      std::array<bool, kChannels> done{};
      for (const auto& [ea, eb] : coupling.coupled_pairs) {
        const auto jb = montage_index(eb);
        if (done[jb]) continue;
        done[jb] = true;
        phase[1][1][jb] = wrap(phase[0][1][montage_index(ea)] + offset);
      }
    }
    const bool erd_band = osc.band.name() == BandName::alpha || osc.band.name() == BandName::beta;
    const double omega = 2.0 * kPi * osc.center_hz / fs;
    std::vector<double> carrier_cos(n);
    std::vector<double> carrier_sin(n);
    for (std::size_t i = 0; i < n; ++i) {
      carrier_cos[i] = std::cos(omega * static_cast<double>(i));
      carrier_sin[i] = std::sin(omega * static_cast<double>(i));
    }
    for (int s = 0; s < 2; ++s) {
      const auto& gains = erd.for_class(imagined[static_cast<std::size_t>(s)]).gains;
      for (std::size_t ch = 0; ch < kChannels; ++ch) {
        const double amp = osc.amplitude_uv * std::exp(params.amplitude_jitter * gauss(rng));
        const double task_amp = erd_band ? amp * std::sqrt(gains[ch]) : amp;
        auto& out = data[static_cast<std::size_t>(s)][ch];
        // cos(wt + phi) = cos(wt) cos(phi) - sin(wt) sin(phi)
        const double rc = amp * std::cos(phase[s][0][ch]);
        const double rs = amp * std::sin(phase[s][0][ch]);
        const double tc = task_amp * std::cos(phase[s][1][ch]);
        const double ts = task_amp * std::sin(phase[s][1][ch]);
        for (std::size_t i = 0; i < n; ++i) {
          const double w = task_weight[i];
          const double rest = carrier_cos[i] * rc - carrier_sin[i] * rs;
          const double task = carrier_cos[i] * tc - carrier_sin[i] * ts;
          out[i] += (1.0 - w) * rest + w * task;
        }
      }
    }
  }

  for (int s = 0; s < 2; ++s) {
    const double line_phase = uniform_phase(rng);
    for (std::size_t ch = 0; ch < kChannels; ++ch) {
      auto& out = data[static_cast<std::size_t>(s)][ch];
      const auto noise = pink_noise(rng, n, fs, params.noise_rms_uv);
      for (std::size_t i = 0; i < n; ++i) {
        out[i] += noise[i] + params.line_noise_uv * std::cos(2.0 * kPi * 50.0 * static_cast<double>(i) / fs + line_phase);
      }
    }
  }

  DyadEpochs result;
  for (int s = 0; s < 2; ++s) {
    Epoch& e = s == 0 ? result.a : result.b;
    e.trial_index = global_index;
    e.condition = s == 0 ? cue.a : cue.b;
    e.sample_rate = fs;
    e.channels.assign(kMontage.begin(), kMontage.end());
    e.data = std::move(data[static_cast<std::size_t>(s)]);
  }
  return result;
}

DyadDataset generate_session(const SessionPlan& plan, const CouplingSpec& coupling, const ErdMap& erd,
                             const SynthParams& params) {
  DyadDataset ds;
  const std::size_t len = epoch_samples(params.sample_rate);
  for (int s = 0; s < 2; ++s) {
    Recording& r = s == 0 ? ds.a : ds.b;
    r.subject_id = s == 0 ? "A" : "B";
    r.channels.assign(kMontage.begin(), kMontage.end());
    r.sample_rate = params.sample_rate;
    r.data.assign(kChannels, {});
    for (auto& ch : r.data) ch.reserve(len * plan.trial_count());
  }
  for (std::size_t t = 0; t < plan.trial_count(); ++t) {
    auto epochs = generate_trial(plan, t, coupling, erd, params);
    ds.onsets.push_back(t * len);
    ds.trial_indices.push_back(epochs.a.trial_index);
    ds.labels_a.push_back(epochs.a.condition);
    ds.labels_b.push_back(epochs.b.condition);
    for (std::size_t ch = 0; ch < kChannels; ++ch) {
      ds.a.data[ch].insert(ds.a.data[ch].end(), epochs.a.data[ch].begin(), epochs.a.data[ch].end());
      ds.b.data[ch].insert(ds.b.data[ch].end(), epochs.b.data[ch].begin(), epochs.b.data[ch].end());
    }
  }
  return ds;
}

}  // namespace dyadsync
