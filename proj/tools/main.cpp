#include <fmt/format.h>

#include <iostream>

#include "CLI11.hpp"
#include "dyadsync/commands.hpp"
#include "dyadsync/error.hpp"

using namespace dyadsync;

namespace {

std::vector<BandName> parse_bands(const std::vector<std::string>& names) {
  std::vector<BandName> out;
  for (const auto& n : names) out.push_back(parse_band(n));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic EEG synchronization and collaborative BCI toolkit"};
  app.require_subcommand(1);

  SynthConfig synth;
  std::vector<double> kappas{0.3, 1.5, 0.3}, gains{0.8, 0.5, 0.75};
  std::string coupling_band = "alpha";
  auto* s = app.add_subcommand("synth", "Generate a synthetic dyad dataset");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--seed", synth.seed, "Dataset seed")->capture_default_str();
  s->add_option("--dyads", synth.dyads, "Number of dyads")->capture_default_str();
  s->add_option("--blocks", synth.blocks, "Blocks per phase")->capture_default_str();
  s->add_option("--trials-per-block", synth.trials_per_block, "Trials per block")->capture_default_str();
  s->add_option("--phases", synth.phases, "Phases to generate")->capture_default_str();
  s->add_option("--kappa", kappas, "Coupling concentration for phases 1 2 3")->expected(3)->capture_default_str();
  s->add_option("--erd", gains, "ERD power gain for phases 1 2 3")->expected(3)->capture_default_str();
  s->add_option("--coupling-band", coupling_band, "Band carrying the inter-brain coupling")->capture_default_str();

  EpochConfig epoch;
  auto* ep = app.add_subcommand("epoch", "Preprocess one recording into an epoch archive");
  ep->add_option("--data", epoch.input, "Recording CSV (with JSON sidecar)")->required();
  ep->add_option("--out", epoch.out, "Epoch archive CSV")->required();
  ep->add_option("--amp-limit", epoch.amp_limit, "Artifact amplitude limit (uV)")->capture_default_str();

  IbsConfig ibs;
  std::vector<std::string> ibs_bands;
  auto* i = app.add_subcommand("ibs", "Inter-brain synchronization analysis");
  i->add_option("--data", ibs.data, "Dataset directory")->required();
  i->add_option("--out", ibs.out, "Output directory")->required();
  i->add_option("--band", ibs_bands, "Bands (default: all five)");
  i->add_option("--phases", ibs.phases, "Phases to analyse")->capture_default_str();
  i->add_flag("--fdr", ibs.fdr, "Benjamini-Hochberg correction over the 64 pairs");
  i->add_option("--alpha", ibs.alpha, "Significance level")->capture_default_str();
  i->add_option("--window", ibs.plv.window_s, "PLV window (s)")->capture_default_str();

  FbnConfig fbn;
  std::vector<std::string> fbn_bands;
  auto* f = app.add_subcommand("fbn", "Functional brain network analysis, Phase 1 vs Phase 3");
  f->add_option("--data", fbn.data, "Dataset directory")->required();
  f->add_option("--out", fbn.out, "Output directory")->required();
  f->add_option("--band", fbn_bands, "Bands (default: all five)");
  f->add_option("--tau", fbn.tau, "Edge threshold")->capture_default_str();
  f->add_option("--refs", fbn.small_world.n_refs, "Random references for small-worldness")->capture_default_str();
  f->add_option("--seed", fbn.small_world.seed, "Seed for reference graphs")->capture_default_str();

  ClassifyConfig cls;
  auto* c = app.add_subcommand("classify", "Per-subject cross-validated MI classification");
  c->add_option("--data", cls.data, "Dataset directory")->required();
  c->add_option("--out", cls.out, "Output directory")->required();
  c->add_option("--folds", cls.folds, "Cross-validation folds")->capture_default_str();
  c->add_option("--phases", cls.phases, "Phases to evaluate")->capture_default_str();
  c->add_option("--seed", cls.train.seed, "Training seed")->capture_default_str();

  TrainCmdConfig tr;
  auto* t = app.add_subcommand("train", "Train both subjects' models for the hub");
  t->add_option("--data", tr.data, "Dataset directory")->required();
  t->add_option("--out", tr.out, "Directory for model_a.json and model_b.json")->required();
  t->add_option("--dyad", tr.dyad, "Dyad number")->capture_default_str();
  t->add_option("--phases", tr.phases, "Training phases")->capture_default_str();
  t->add_option("--seed", tr.train.seed, "Training seed")->capture_default_str();

  HubCmdConfig hub;
  auto* h = app.add_subcommand("hub", "Run the cBCI hub");
  h->add_option("--addr", hub.addr, "Listen address host:port")->capture_default_str();
  h->add_option("--data", hub.data, "Dataset directory (fixes the schedule)")->required();
  h->add_option("--dyad", hub.dyad, "Dyad number")->capture_default_str();
  h->add_option("--model-a", hub.model_a, "Subject A model")->required();
  h->add_option("--model-b", hub.model_b, "Subject B model")->required();
  h->add_option("--phases", hub.phases, "Phases to run")->capture_default_str();
  h->add_option("--blocks", hub.blocks, "Blocks per phase to run")->capture_default_str();
  h->add_option("--log", hub.log, "Session log (JSON lines)");
  h->add_option("--timeout", hub.timeout_s, "Trial timeout (logical s)")->capture_default_str();
  h->add_option("--time-scale", hub.time_scale, "Real seconds per logical second")->capture_default_str();
  h->add_flag("--real-time", hub.real_time, "Pace trials on the wall clock");
  h->add_flag("--free-assignment", hub.free_assignment, "Accept either hand/head assignment");

  ClientCmdConfig client;
  std::size_t disconnect_at = 0;
  auto* cl = app.add_subcommand("client", "Play back one subject's epochs to the hub");
  cl->add_option("--addr", client.addr, "Hub address host:port")->capture_default_str();
  cl->add_option("--data", client.data, "Dataset directory")->required();
  cl->add_option("--dyad", client.dyad, "Dyad number")->capture_default_str();
  cl->add_option("--slot", client.slot, "Subject slot (0 = A, 1 = B)")->capture_default_str();
  cl->add_option("--phases", client.phases, "Phases to load")->capture_default_str();
  cl->add_option("--skip", client.skip_trials, "Trial indices never answered");
  auto* disc = cl->add_option("--disconnect-at", disconnect_at, "Disconnect when this trial starts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) {
      synth.scenario.phases = {{{kappas[0], gains[0]}, {kappas[1], gains[1]}, {kappas[2], gains[2]}}};
      synth.scenario.coupling_band = parse_band(coupling_band);
      const auto m = cmd_synth(synth);
      fmt::print("wrote {} recording pairs to {}\n", m.entries.size(), synth.out.string());
    } else if (*ep) {
      fmt::print("kept {} epochs\n", cmd_epoch(epoch));
    } else if (*i) {
      if (!ibs_bands.empty()) ibs.bands = parse_bands(ibs_bands);
      const auto r = cmd_ibs(ibs);
      for (const auto& b : r.bands) {
        fmt::print("{:6} task {:.4f} rest {:.4f} significant {}/{}\n", to_string(b.band), b.task_mean, b.rest_mean,
                   b.significant, b.tests);
      }
    } else if (*f) {
      if (!fbn_bands.empty()) fbn.bands = parse_bands(fbn_bands);
      const auto r = cmd_fbn(fbn);
      fmt::print("analysed {} subject networks\n", r.metrics.size());
    } else if (*c) {
      const auto r = cmd_classify(cls);
      for (const auto& [phase, acc] : r.mean_accuracy) fmt::print("phase {} mean accuracy {:.4f}\n", phase, acc);
      for (const auto& cmp : r.comparisons) {
        fmt::print("kruskal-wallis {}: H = {:.4f}, p = {:.4g}\n", cmp.groups, cmp.test.statistic, cmp.test.p_value);
      }
    } else if (*t) {
      cmd_train(tr);
      fmt::print("models written to {}\n", tr.out.string());
    } else if (*h) {
      cmd_hub(hub, std::cout);
    } else if (*cl) {
      if (disc->count()) client.disconnect_at_trial = disconnect_at;
      cmd_client(client, std::cout);
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error ({}): {}\n", to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
