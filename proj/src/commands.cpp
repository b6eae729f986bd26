#include "dyadsync/commands.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "dyadsync/error.hpp"
#include "dyadsync/io.hpp"
#include "dyadsync/svg.hpp"
#include "json.hpp"

namespace dyadsync {

namespace {

using json = nlohmann::ordered_json;
using io::num;

constexpr std::size_t kN = kMontage.size();

std::string subject_name(int dyad, int slot) { return fmt::format("dyad{:02}-{}", dyad, slot == 0 ? "A" : "B"); }

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

std::vector<const ManifestEntry*> entries_for(const Manifest& m, const std::vector<int>& phases) {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : m.entries)
    if (contains(phases, e.phase)) out.push_back(&e);
  std::sort(out.begin(), out.end(), [](const auto* x, const auto* y) {
    return std::pair(x->dyad, x->phase) < std::pair(y->dyad, y->phase);
  });
  if (out.empty()) throw Error(Errc::invalid_argument, "the dataset holds none of the requested phases");
  return out;
}

void ensure_output_dir(const fs::path& out) {
  std::error_code ec;
  if (fs::exists(out, ec) && !fs::is_directory(out, ec)) {
    throw Error(Errc::io, fmt::format("output path {} exists and is not a directory", out.string()));
  }
  fs::create_directories(out, ec);
  if (ec) throw Error(Errc::io, fmt::format("cannot create {}: {}", out.string(), ec.message()));
}

/// Row cells first..., then t, df, p, then rest...
std::vector<std::string> row_with_test(std::vector<std::string> first, const std::optional<TestResult>& t,
                                       std::vector<std::string> rest) {
  if (t) {
    first.insert(first.end(), {num(t->statistic), num(t->df), num(t->p_value)});
  } else {
    first.insert(first.end(), {"nan", "nan", "nan"});
  }
  first.insert(first.end(), rest.begin(), rest.end());
  return first;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset layout
// ---------------------------------------------------------------------------

std::uint64_t dyad_seed(std::uint64_t seed, int dyad) { return seed * 1000 + static_cast<std::uint64_t>(dyad); }

Manifest Manifest::load(const fs::path& dir) {
  const auto path = dir / "manifest.json";
  Manifest m;
  m.root = dir;
  try {
    const auto j = json::parse(io::read_text(path));
    m.seed = j.at("seed").get<std::uint64_t>();
    m.blocks = j.at("blocks").get<int>();
    m.trials_per_block = j.at("trials_per_block").get<int>();
    for (const auto& e : j.at("entries")) {
      m.entries.push_back({e.at("dyad").get<int>(), e.at("phase").get<int>(), e.at("seed").get<std::uint64_t>(),
                           fs::path(e.at("subject_a").get<std::string>()),
                           fs::path(e.at("subject_b").get<std::string>())});
    }
  } catch (const json::exception& e) {
    throw Error(Errc::io, fmt::format("{}: {}", path.string(), e.what()));
  }
  return m;
}

std::vector<int> Manifest::dyads() const {
  std::set<int> s;
  for (const auto& e : entries) s.insert(e.dyad);
  return {s.begin(), s.end()};
}

const ManifestEntry& Manifest::find(int dyad, int phase) const {
  for (const auto& e : entries)
    if (e.dyad == dyad && e.phase == phase) return e;
  throw Error(Errc::invalid_argument, fmt::format("dataset has no phase {} for dyad {}", phase, dyad));
}

PhaseEpochs prepare_phase(const Recording& a, const Recording& b, std::span<const std::size_t> onsets,
                          std::span<const ClassLabel> labels_a, std::span<const ClassLabel> labels_b,
                          std::span<const std::size_t> trial_indices, double amp_limit) {
  if (a.sample_rate != b.sample_rate) throw Error(Errc::alignment, "subjects were recorded at different rates");
  const auto on = rescale_onsets(onsets, a.sample_rate, kAnalysisRate);
  auto ra = artifact_reject(epoch_recording(prepare_recording(a), on, labels_a, trial_indices), amp_limit);
  auto rb = artifact_reject(epoch_recording(prepare_recording(b), on, labels_b, trial_indices), amp_limit);
  std::set<std::size_t> dropped(ra.dropped.begin(), ra.dropped.end());
  dropped.insert(rb.dropped.begin(), rb.dropped.end());
  PhaseEpochs out;
  out.dropped.assign(dropped.begin(), dropped.end());
  for (auto& e : ra.kept)
    if (!dropped.count(e.trial_index)) out.a.push_back(std::move(e));
  for (auto& e : rb.kept)
    if (!dropped.count(e.trial_index)) out.b.push_back(std::move(e));
  return out;
}

PhaseEpochs prepare_phase(const DyadDataset& ds, double amp_limit) {
  return prepare_phase(ds.a, ds.b, ds.onsets, ds.labels_a, ds.labels_b, ds.trial_indices, amp_limit);
}

PhaseEpochs load_phase(const Manifest& m, const ManifestEntry& e, double amp_limit) {
  const auto fa = io::read_recording(m.root / e.subject_a);
  const auto fb = io::read_recording(m.root / e.subject_b);
  if (fa.trial_onsets != fb.trial_onsets || fa.trial_indices != fb.trial_indices) {
    throw Error(Errc::alignment, fmt::format("dyad {} phase {}: subjects' trial lists differ", e.dyad, e.phase));
  }
  return prepare_phase(fa.recording, fb.recording, fa.trial_onsets, fa.labels, fb.labels, fa.trial_indices, amp_limit);
}

DyadDataset synth_phase(std::uint64_t session_seed, int phase, const SynthScenario& scenario, int blocks,
                        int trials_per_block) {
  if (phase < 1 || phase > 3) throw Error(Errc::invalid_argument, fmt::format("unknown phase {}", phase));
  const auto& s = scenario.phases[static_cast<std::size_t>(phase - 1)];
  const auto plan = phase_plan(default_phases(blocks, trials_per_block), phase, session_seed);
  return generate_session(plan, CouplingSpec::matched(s.kappa, scenario.coupling_band),
                          ErdMap::motor_imagery(s.erd_gain));
}

// ---------------------------------------------------------------------------
// synth / epoch
// ---------------------------------------------------------------------------

Manifest cmd_synth(const SynthConfig& cfg) {
  if (cfg.dyads <= 0) throw Error(Errc::invalid_argument, "--dyads must be positive");
  if (cfg.blocks <= 0 || cfg.trials_per_block <= 0) throw Error(Errc::invalid_argument, "block sizes must be positive");
  for (int p : cfg.phases) {
    if (p < 1 || p > 3) throw Error(Errc::invalid_argument, fmt::format("unknown phase {}", p));
  }
  ensure_output_dir(cfg.out);

  Manifest m;
  m.root = cfg.out;
  m.seed = cfg.seed;
  m.blocks = cfg.blocks;
  m.trials_per_block = cfg.trials_per_block;
  json entries = json::array();
  for (int d = 1; d <= cfg.dyads; ++d) {
    const auto seed = dyad_seed(cfg.seed, d);
    for (int p : cfg.phases) {
      const auto ds = synth_phase(seed, p, cfg.scenario, cfg.blocks, cfg.trials_per_block);
      const fs::path dir = fs::path(fmt::format("dyad{:02}", d)) / fmt::format("phase{}", p);
      ManifestEntry e{d, p, seed, dir / "A.csv", dir / "B.csv"};
      io::write_recording(cfg.out / e.subject_a, {ds.a, ds.onsets, ds.labels_a, ds.trial_indices});
      io::write_recording(cfg.out / e.subject_b, {ds.b, ds.onsets, ds.labels_b, ds.trial_indices});
      entries.push_back({{"dyad", d},
                         {"phase", p},
                         {"seed", seed},
                         {"subject_a", e.subject_a.generic_string()},
                         {"subject_b", e.subject_b.generic_string()}});
      m.entries.push_back(e);
    }
  }
  json phases = json::array();
  for (int p = 1; p <= 3; ++p) {
    const auto& s = cfg.scenario.phases[static_cast<std::size_t>(p - 1)];
    phases.push_back({{"phase", p},
                      {"mode", p == 2 ? "cooperative" : "single"},
                      {"kappa", s.kappa},
                      {"erd_gain", s.erd_gain}});
  }
  json j;
  j["seed"] = cfg.seed;
  j["dyads"] = cfg.dyads;
  j["blocks"] = cfg.blocks;
  j["trials_per_block"] = cfg.trials_per_block;
  j["sample_rate"] = SynthParams{}.sample_rate;
  j["coupling_band"] = std::string(to_string(cfg.scenario.coupling_band));
  j["phases"] = phases;
  j["entries"] = entries;
  io::write_text(cfg.out / "manifest.json", j.dump(2) + "\n");
  return m;
}

std::size_t cmd_epoch(const EpochConfig& cfg) {
  const auto file = io::read_recording(cfg.input);
  const auto on = rescale_onsets(file.trial_onsets, file.recording.sample_rate, kAnalysisRate);
  auto epochs = epoch_recording(prepare_recording(file.recording), on, file.labels, file.trial_indices);
  auto r = artifact_reject(std::move(epochs), cfg.amp_limit);
  io::write_epoch_archive(cfg.out, file.recording.subject_id, r.kept, r.dropped);
  return r.kept.size();
}

// ---------------------------------------------------------------------------
// ibs
// ---------------------------------------------------------------------------

const IbsBandSummary& IbsReport::at(BandName b) const {
  for (const auto& s : bands)
    if (s.band == b) return s;
  throw Error(Errc::invalid_argument, fmt::format("band {} was not analysed", to_string(b)));
}

IbsReport cmd_ibs(const IbsConfig& cfg) {
  if (cfg.bands.empty()) throw Error(Errc::invalid_argument, "no bands selected");
  const auto m = Manifest::load(cfg.data);
  const auto entries = entries_for(m, cfg.phases);
  ensure_output_dir(cfg.out);

  io::Table plv({"dyad", "phase", "band", "state", "electrode_a", "electrode_b", "plv"});
  io::Table series({"dyad", "phase", "band", "state", "window_center_s", "plv"});
  io::Table contrast({"dyad", "phase", "band", "electrode_a", "electrode_b", "task_plv", "rest_plv", "t", "df",
                      "p_value", "p_adjusted", "significant"});
  io::Table roi({"dyad", "phase", "band", "roi_a", "roi_b", "pairs", "significant", "increased"});

  IbsReport report;
  for (BandName b : cfg.bands) report.bands.push_back({b});
  auto summary_of = [&](BandName b) -> IbsBandSummary& {
    for (auto& s : report.bands)
      if (s.band == b) return s;
    throw Error(Errc::invalid_argument, "band");
  };
  // (phase, band) -> per-dyad task and rest matrices, for the group test
  std::map<std::pair<int, BandName>, std::vector<std::pair<std::vector<double>, std::vector<double>>>> group;
  // (band, state) -> summed window series over entries
  std::map<std::pair<BandName, BrainState>, std::pair<std::vector<double>, std::vector<double>>> plot_sum;

  for (const auto* e : entries) {
    const auto pe = load_phase(m, *e, kDefaultAmplitudeLimitUv);
    if (pe.a.size() < 2) {
      throw Error(Errc::sample_size, fmt::format("dyad {} phase {} keeps fewer than 2 trials", e->dyad, e->phase));
    }
    for (BandName bn : cfg.bands) {
      const auto band = FrequencyBand::named(bn);
      std::array<std::vector<PhaseSeries>, 2> pa, pb;
      std::array<IbsMatrix, 2> mats;
      for (BrainState st : {BrainState::rest, BrainState::task}) {
        const auto k = static_cast<std::size_t>(st);
        pa[k] = montage_phases(pe.a, band, st);
        pb[k] = montage_phases(pe.b, band, st);
        mats[k] = ibs_from_phases(pa[k], pb[k], band, st, cfg.plv);
        for (std::size_t i = 0; i < kN; ++i) {
          for (std::size_t j = 0; j < kN; ++j) {
            plv.add({std::to_string(e->dyad), std::to_string(e->phase), std::string(to_string(bn)),
                     std::string(to_string(st)), std::string(to_string(kMontage[i])),
                     std::string(to_string(kMontage[j])), num(mats[k].entries[i * kN + j])});
          }
        }
        // Grand mean over the 64 pairs, per window.
        const auto& centers = mats[k].series.front().window_centers;
        std::vector<double> mean_series(centers.size(), 0.0);
        for (const auto& s : mats[k].series)
          for (std::size_t w = 0; w < centers.size(); ++w) mean_series[w] += s.values[w] / (kN * kN);
        for (std::size_t w = 0; w < centers.size(); ++w) {
          series.add({std::to_string(e->dyad), std::to_string(e->phase), std::string(to_string(bn)),
                      std::string(to_string(st)), num(centers[w]), num(mean_series[w])});
        }
        auto& acc = plot_sum[{bn, st}];
        if (acc.first.empty()) {
          acc.first = centers;
          acc.second.assign(centers.size(), 0.0);
        }
        for (std::size_t w = 0; w < std::min(centers.size(), acc.second.size()); ++w) acc.second[w] += mean_series[w];
      }
      const auto& rest = mats[0];
      const auto& task = mats[1];

      std::vector<std::optional<TestResult>> tests(kN * kN);
      std::vector<double> p(kN * kN, 1.0);
      for (std::size_t i = 0; i < kN; ++i) {
        for (std::size_t j = 0; j < kN; ++j) {
          const auto tt = trialwise_plv(pa[1][i], pb[1][j], cfg.plv.window_s, cfg.plv.step_s);
          const auto rt = trialwise_plv(pa[0][i], pb[0][j], cfg.plv.window_s, cfg.plv.step_s);
          try {
            tests[i * kN + j] = state_contrast(tt, rt);
            p[i * kN + j] = tests[i * kN + j]->p_value;
          } catch (const Error&) {
            p[i * kN + j] = 1.0;
          }
        }
      }
      const auto p_adj = cfg.fdr ? benjamini_hochberg(p) : p;
      auto& summary = summary_of(bn);
      std::array<std::array<std::pair<int, int>, 3>, 3> roi_counts{};
      std::array<std::array<int, 3>, 3> roi_pairs{};
      for (std::size_t i = 0; i < kN; ++i) {
        for (std::size_t j = 0; j < kN; ++j) {
          const auto k = i * kN + j;
          const bool sig = tests[k].has_value() && p_adj[k] < cfg.alpha;
          const auto ra = static_cast<std::size_t>(roi_of(kMontage[i]));
          const auto rb = static_cast<std::size_t>(roi_of(kMontage[j]));
          ++roi_pairs[ra][rb];
          if (sig) {
            ++roi_counts[ra][rb].first;
            if (tests[k]->statistic > 0) ++roi_counts[ra][rb].second;
          }
          ++summary.tests;
          if (sig) ++summary.significant;
          contrast.add(row_with_test({std::to_string(e->dyad), std::to_string(e->phase), std::string(to_string(bn)),
                                      std::string(to_string(kMontage[i])), std::string(to_string(kMontage[j])),
                                      num(task.entries[k]), num(rest.entries[k])},
                                     tests[k], {num(p_adj[k]), sig ? "1" : "0"}));
        }
      }
      for (std::size_t ra = 0; ra < 3; ++ra) {
        for (std::size_t rb = 0; rb < 3; ++rb) {
          roi.add({std::to_string(e->dyad), std::to_string(e->phase), std::string(to_string(bn)),
                   std::string(to_string(static_cast<Roi>(ra))), std::string(to_string(static_cast<Roi>(rb))),
                   std::to_string(roi_pairs[ra][rb]), std::to_string(roi_counts[ra][rb].first),
                   std::to_string(roi_counts[ra][rb].second)});
        }
      }
      summary.task_mean += mean(task.entries) / static_cast<double>(entries.size());
      summary.rest_mean += mean(rest.entries) / static_cast<double>(entries.size());
      group[{e->phase, bn}].push_back({task.entries, rest.entries});
    }
  }

  // Across-dyad paired tests on the per-dyad PLV of each pair.
  io::Table group_table({"phase", "band", "electrode_a", "electrode_b", "dyads", "task_plv", "rest_plv", "t", "df",
                         "p_value", "p_adjusted", "significant"});
  for (const auto& [key, dyads] : group) {
    if (dyads.size() < 2) continue;
    std::vector<std::optional<TestResult>> tests(kN * kN);
    std::vector<double> p(kN * kN, 1.0);
    std::vector<double> tm(kN * kN), rm(kN * kN);
    for (std::size_t k = 0; k < kN * kN; ++k) {
      std::vector<double> t, r;
      for (const auto& d : dyads) {
        t.push_back(d.first[k]);
        r.push_back(d.second[k]);
      }
      tm[k] = mean(t);
      rm[k] = mean(r);
      try {
        tests[k] = paired_t_test(t, r);
        p[k] = tests[k]->p_value;
      } catch (const Error&) {
      }
    }
    const auto p_adj = cfg.fdr ? benjamini_hochberg(p) : p;
    for (std::size_t k = 0; k < kN * kN; ++k) {
      const bool sig = tests[k].has_value() && p_adj[k] < cfg.alpha;
      if (sig) ++summary_of(key.second).group_significant;
      group_table.add(row_with_test({std::to_string(key.first), std::string(to_string(key.second)),
                                     std::string(to_string(kMontage[k / kN])), std::string(to_string(kMontage[k % kN])),
                                     std::to_string(dyads.size()), num(tm[k]), num(rm[k])},
                                    tests[k], {num(p_adj[k]), sig ? "1" : "0"}));
    }
  }

  plv.write(cfg.out / "ibs_plv.csv");
  series.write(cfg.out / "ibs_series.csv");
  contrast.write(cfg.out / "ibs_contrast.csv");
  group_table.write(cfg.out / "ibs_group_contrast.csv");
  roi.write(cfg.out / "ibs_roi_counts.csv");

  json summary = json::array();
  for (const auto& s : report.bands) {
    summary.push_back({{"band", std::string(to_string(s.band))},
                       {"task_mean_plv", s.task_mean},
                       {"rest_mean_plv", s.rest_mean},
                       {"tests", s.tests},
                       {"significant", s.significant},
                       {"significant_fraction", s.tests ? static_cast<double>(s.significant) / s.tests : 0.0},
                       {"group_significant", s.group_significant}});
    svg::LinePlot plot{fmt::format("Mean inter-brain PLV, {} band", to_string(s.band)), "time (s)", "PLV", {}};
    for (BrainState st : {BrainState::rest, BrainState::task}) {
      const auto& acc = plot_sum[{s.band, st}];
      std::vector<double> y = acc.second;
      for (auto& v : y) v /= static_cast<double>(entries.size());
      plot.series.push_back({std::string(to_string(st)), acc.first, y});
    }
    io::write_text(cfg.out / "plots" / fmt::format("ibs_{}.svg", to_string(s.band)), svg::render(plot));
  }
  json j;
  j["alpha"] = cfg.alpha;
  j["fdr"] = cfg.fdr;
  j["entries"] = entries.size();
  j["bands"] = summary;
  io::write_text(cfg.out / "ibs_summary.json", j.dump(2) + "\n");
  return report;
}

// ---------------------------------------------------------------------------
// fbn
// ---------------------------------------------------------------------------

FbnReport cmd_fbn(const FbnConfig& cfg) {
  if (cfg.bands.empty()) throw Error(Errc::invalid_argument, "no bands selected");
  const auto m = Manifest::load(cfg.data);
  ensure_output_dir(cfg.out);

  io::Table edges({"subject", "phase", "band", "node_a", "node_b", "weight", "kept"});
  io::Table metrics({"subject", "phase", "band", "metric", "node", "value"});
  FbnReport report;
  std::map<std::pair<int, BandName>, std::vector<SubjectMetrics>> by_phase;
  std::map<std::pair<int, BandName>, std::vector<double>> mean_weights;
  std::map<std::pair<int, BandName>, int> counts;

  for (int dyad : m.dyads()) {
    for (int phase : {1, 3}) {
      const auto pe = load_phase(m, m.find(dyad, phase));
      for (int slot = 0; slot < 2; ++slot) {
        const auto& epochs = slot == 0 ? pe.a : pe.b;
        const auto subject = subject_name(dyad, slot);
        for (BandName bn : cfg.bands) {
          const auto cm = intra_brain_connectivity(epochs, FrequencyBand::named(bn));
          const auto g = threshold_graph(cm, cfg.tau);
          if (!g.is_connected()) {
            throw Error(Errc::disconnected,
                        fmt::format("{} phase {} {} band: network thresholded at tau = {} is disconnected", subject,
                                    phase, to_string(bn), cfg.tau));
          }
          const auto nm = network_metrics(g, cfg.small_world);
          for (std::size_t i = 0; i < kN; ++i) {
            for (std::size_t j = i + 1; j < kN; ++j) {
              edges.add({subject, std::to_string(phase), std::string(to_string(bn)),
                         std::string(to_string(kMontage[i])), std::string(to_string(kMontage[j])), num(cm.at(i, j)),
                         g.has_edge(i, j) ? "1" : "0"});
            }
          }
          const std::string ph = std::to_string(phase), band = std::string(to_string(bn));
          metrics.add({subject, ph, band, "char_path_length", "global", num(nm.char_path_length)});
          metrics.add({subject, ph, band, "clustering_coeff", "global", num(nm.clustering_coeff)});
          metrics.add({subject, ph, band, "small_worldness", "global", num(nm.small_worldness)});
          for (std::size_t i = 0; i < kN; ++i) {
            metrics.add({subject, ph, band, "degree", std::string(to_string(kMontage[i])), std::to_string(nm.degree[i])});
            metrics.add({subject, ph, band, "betweenness", std::string(to_string(kMontage[i])), num(nm.betweenness[i])});
          }
          auto& mw = mean_weights[{phase, bn}];
          if (mw.empty()) mw.assign(kN * kN, 0.0);
          for (std::size_t k = 0; k < kN * kN; ++k) mw[k] += cm.weights()[k];
          ++counts[{phase, bn}];
          by_phase[{phase, bn}].push_back({subject, nm});
          report.metrics[{subject, phase, bn}] = nm;
        }
      }
    }
  }

  io::Table comparison({"band", "metric", "node", "mean_difference", "t", "df", "p_value", "note"});
  for (BandName bn : cfg.bands) {
    auto cmp = compare_phases(by_phase[{1, bn}], by_phase[{3, bn}]);
    for (const auto& c : cmp) {
      comparison.add(row_with_test({std::string(to_string(bn)), c.metric,
                                    c.node ? std::string(to_string(kMontage[*c.node])) : "global",
                                    num(c.mean_difference)},
                                   c.test, {c.note}));
    }
    report.comparisons[bn] = std::move(cmp);
    for (int phase : {1, 3}) {
      auto w = mean_weights[{phase, bn}];
      for (auto& v : w) v /= counts[{phase, bn}];
      svg::CircularGraph graph;
      graph.title = fmt::format("Phase {} mean network, {} band (tau = {})", phase, to_string(bn), cfg.tau);
      for (Electrode e : kMontage) graph.nodes.emplace_back(to_string(e));
      for (std::size_t i = 0; i < kN; ++i)
        for (std::size_t j = i + 1; j < kN; ++j)
          if (w[i * kN + j] > cfg.tau) graph.edges.push_back({i, j, w[i * kN + j]});
      io::write_text(cfg.out / "plots" / fmt::format("fbn_phase{}_{}.svg", phase, to_string(bn)), svg::render(graph));
    }
  }
  edges.write(cfg.out / "fbn_edges.csv");
  metrics.write(cfg.out / "fbn_metrics.csv");
  comparison.write(cfg.out / "fbn_comparison.csv");
  return report;
}

// ---------------------------------------------------------------------------
// classify / train
// ---------------------------------------------------------------------------

void collect_features(std::span<const Epoch> epochs, int slot, std::vector<FeatureVector>& features,
                      std::vector<MotorClass>& labels) {
  for (const auto& e : epochs) {
    features.push_back(extract_features(e));
    labels.push_back(e.condition.for_slot(slot));
  }
}

std::vector<PhaseComparison> compare_phase_accuracies(const std::map<int, std::vector<double>>& accuracies) {
  std::vector<PhaseComparison> out;
  for (auto i = accuracies.begin(); i != accuracies.end(); ++i) {
    for (auto j = std::next(i); j != accuracies.end(); ++j) {
      out.push_back({fmt::format("{}-{}", i->first, j->first), kruskal_wallis({i->second, j->second})});
    }
  }
  if (accuracies.size() > 2) {
    std::vector<std::vector<double>> groups;
    for (const auto& [phase, acc] : accuracies) groups.push_back(acc);
    out.push_back({"all", kruskal_wallis(groups)});
  }
  return out;
}

ClassifyReport cmd_classify(const ClassifyConfig& cfg) {
  const auto m = Manifest::load(cfg.data);
  const auto entries = entries_for(m, cfg.phases);
  ensure_output_dir(cfg.out);

  ClassifyReport report;
  std::map<int, std::vector<double>> accuracies;
  io::Table folds({"subject", "phase", "fold", "samples", "accuracy", "macro_f1"});
  io::Table summary({"subject", "phase", "mean_accuracy", "macro_f1"});
  for (const auto* e : entries) {
    const auto pe = load_phase(m, *e);
    for (int slot = 0; slot < 2; ++slot) {
      std::vector<FeatureVector> f;
      std::vector<MotorClass> y;
      collect_features(slot == 0 ? pe.a : pe.b, slot, f, y);
      auto cv = cross_validate(f, y, cfg.folds, cfg.train);
      const auto subject = subject_name(e->dyad, slot);
      for (const auto& fr : cv.folds) {
        folds.add({subject, std::to_string(e->phase), std::to_string(fr.fold), std::to_string(fr.samples),
                   num(fr.accuracy), num(fr.macro_f1)});
      }
      summary.add({subject, std::to_string(e->phase), num(cv.mean_accuracy), num(cv.macro_f1)});
      accuracies[e->phase].push_back(cv.mean_accuracy);
      report.results.push_back({subject, e->phase, std::move(cv)});
    }
  }
  for (const auto& [phase, acc] : accuracies) report.mean_accuracy[phase] = mean(acc);
  io::Table tests({"phases", "statistic", "df", "p_value", "n"});
  if (accuracies.size() >= 2) {
    report.comparisons = compare_phase_accuracies(accuracies);
    for (const auto& c : report.comparisons) {
      tests.add({c.groups, num(c.test.statistic), num(c.test.df), num(c.test.p_value), std::to_string(c.test.n)});
    }
  }
  folds.write(cfg.out / "classify_folds.csv");
  summary.write(cfg.out / "classify_summary.csv");
  tests.write(cfg.out / "classify_phase_tests.csv");

  json j;
  j["folds"] = cfg.folds;
  json phases = json::object();
  for (const auto& [phase, acc] : report.mean_accuracy) phases[std::to_string(phase)] = acc;
  j["mean_accuracy"] = phases;
  json cmp = json::array();
  for (const auto& c : report.comparisons) {
    auto t = json::parse(to_json(c.test));
    t["phases"] = c.groups;
    cmp.push_back(t);
  }
  j["kruskal_wallis"] = cmp;
  io::write_text(cfg.out / "classify_summary.json", j.dump(2) + "\n");

  svg::LinePlot plot{"Cross-validated accuracy per subject", "subject", "accuracy", {}};
  for (const auto& [phase, acc] : accuracies) {
    std::vector<double> x(acc.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i + 1);
    plot.series.push_back({fmt::format("phase {}", phase), x, acc});
  }
  io::write_text(cfg.out / "plots" / "classify_accuracy.svg", svg::render(plot));
  return report;
}

std::array<Model, 2> cmd_train(const TrainCmdConfig& cfg) {
  const auto m = Manifest::load(cfg.data);
  std::array<std::vector<FeatureVector>, 2> f;
  std::array<std::vector<MotorClass>, 2> y;
  for (int phase : cfg.phases) {
    const auto pe = load_phase(m, m.find(cfg.dyad, phase));
    for (int slot = 0; slot < 2; ++slot) collect_features(slot == 0 ? pe.a : pe.b, slot, f[slot], y[slot]);
  }
  ensure_output_dir(cfg.out);
  std::array<Model, 2> models;
  for (int slot = 0; slot < 2; ++slot) {
    models[slot] = train(f[slot], y[slot], cfg.train).model;
    io::write_text(cfg.out / (slot == 0 ? "model_a.json" : "model_b.json"), model_to_json(models[slot]));
  }
  return models;
}

// ---------------------------------------------------------------------------
// hub / client
// ---------------------------------------------------------------------------

TrialSchedule hub_schedule(const Manifest& m, int dyad, const std::vector<int>& phases, int blocks) {
  const auto& first = m.find(dyad, phases.empty() ? 2 : phases.front());
  return schedule_session(first.seed, default_phases(m.blocks, m.trials_per_block)).select(phases, blocks);
}

SessionLog cmd_hub(const HubCmdConfig& cfg, std::ostream& out) {
  const auto m = Manifest::load(cfg.data);
  HubConfig hc;
  hc.listen = net::parse_address(cfg.addr);
  hc.schedule = hub_schedule(m, cfg.dyad, cfg.phases, cfg.blocks);
  hc.model_a = model_from_json(io::read_text(cfg.model_a));
  hc.model_b = model_from_json(io::read_text(cfg.model_b));
  hc.free_assignment = cfg.free_assignment;
  hc.timeout_s = cfg.timeout_s;
  hc.time_scale = cfg.time_scale;
  hc.real_time = cfg.real_time;
  Hub hub(std::move(hc));
  fmt::print(out, "hub listening on {}:{} ({} trials)\n", net::parse_address(cfg.addr).host, hub.port(),
             hub_schedule(m, cfg.dyad, cfg.phases, cfg.blocks).trial_count());
  out.flush();
  auto log = hub.run([&](const TrialRecord& r) {
    if (r.valid) {
      const auto cue = r.cue.a == r.cue.b ? r.cue.a.to_string() : r.cue.a.to_string() + "/" + r.cue.b.to_string();
      fmt::print(out, "trial {:3} phase {} cue {}: A={} ({:.2f}) B={} ({:.2f}) -> {}\n", r.trial_index, r.phase, cue,
                 to_string(r.pred_a->cls), r.pred_a->probability,
                 to_string(r.pred_b->cls), r.pred_b->probability, to_string(*r.outcome));
    } else {
      fmt::print(out, "trial {:3} phase {} invalid ({})\n", r.trial_index, r.phase, r.invalid_reason);
    }
    out.flush();
  });
  fmt::print(out, "session done: {} valid of {}, {} successes\n", log.valid_count(), log.trials.size(),
             log.success_count());
  if (!cfg.log.empty()) io::write_text(cfg.log, log.to_jsonl());
  return log;
}

std::map<std::size_t, Epoch> client_epochs(const Manifest& m, int dyad, int slot, const std::vector<int>& phases) {
  std::map<std::size_t, Epoch> out;
  for (int phase : phases) {
    auto pe = load_phase(m, m.find(dyad, phase));
    for (auto& e : slot == 0 ? pe.a : pe.b) out.emplace(e.trial_index, std::move(e));
  }
  return out;
}

Transcript cmd_client(const ClientCmdConfig& cfg, std::ostream& out) {
  if (cfg.slot != 0 && cfg.slot != 1) throw Error(Errc::invalid_argument, "--slot must be 0 or 1");
  const auto m = Manifest::load(cfg.data);
  ClientConfig cc;
  cc.hub = net::parse_address(cfg.addr);
  cc.slot = static_cast<std::uint8_t>(cfg.slot);
  cc.epochs = client_epochs(m, cfg.dyad, cfg.slot, cfg.phases);
  cc.skip_trials.insert(cfg.skip_trials.begin(), cfg.skip_trials.end());
  cc.disconnect_at_trial = cfg.disconnect_at_trial;
  auto t = run_client(cc, [&](const proto::Message& msg) {
    if (const auto* f = std::get_if<proto::Feedback>(&msg)) {
      fmt::print(out, "trial {:3} feedback: {} (A={}, B={})\n", f->trial_index, f->fused_outcome ? "success" : "failure",
                 to_string(static_cast<MotorClass>(f->pred_a)), to_string(static_cast<MotorClass>(f->pred_b)));
      out.flush();
    }
  });
  fmt::print(out, "client {} done: {} results, {} feedback\n", cfg.slot == 0 ? "A" : "B", t.results.size(),
             t.feedback.size());
  return t;
}

}  // namespace dyadsync
