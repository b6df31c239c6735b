#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>

#include "CLI11.hpp"
#include "diagnostics.hpp"
#include "gmrbm/assoc_memory.hpp"
#include "gmrbm/errors.hpp"
#include "gmrbm/exact.hpp"
#include "gmrbm/io.hpp"
#include "gmrbm/matching.hpp"
#include "gmrbm/trainer.hpp"
#include "run_config.hpp"

namespace gmrbm::cli {

namespace fs = std::filesystem;

namespace {

struct Invocation {
  std::string config_path;
  Settings flags;
  // match is flag-only
  std::string match_mode;
  std::string rounding = "table";
  bool exact = false;
  std::string sweep_kind;
};

// Registers a flag whose value lands in `inv.flags[key]`.
void flag(CLI::App& app, Invocation& inv, const std::string& name,
          const std::string& key, const std::string& help) {
  app.add_option_function<std::string>(
      name, [&inv, key](const std::string& v) { inv.flags[key] = v; }, help);
}

RunConfig resolve(const Invocation& inv) {
  Settings settings;
  if (!inv.config_path.empty()) settings = load_settings(inv.config_path);
  for (const auto& [k, v] : inv.flags) settings[k] = v;
  return make_run_config(settings);
}

void require_path(const fs::path& p, const char* what) {
  if (p.empty()) throw UsageError(std::string("missing --") + what);
}

void check_readable(const fs::path& p) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) throw DataError("cannot read " + p.string());
}

// Creates the output directory; called only after inputs validated.
void prepare_out(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw DataError("cannot create output directory " + dir.string());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
  if (!f) throw DataError("cannot write " + path.string());
}

ModelParams load_model(const RunConfig& c) {
  require_path(c.model, "model");
  return load_checkpoint(c.model);
}

PairDataset load_pairs(const fs::path& path) {
  const VectorFile f = read_vectors(path);
  return build_pair_dataset(split_pairs(f.rows));
}

void write_rows(const RunConfig& c, const std::vector<Vector>& rows,
                const char* file, std::ostream& out) {
  if (c.out.empty()) {
    write_vectors(out, rows);
    return;
  }
  prepare_out(c.out);
  write_vectors(c.out / file, rows);
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  require_path(c.data, "data");
  require_path(c.out, "out");
  check_readable(c.data);
  const VectorFile file = read_vectors(c.data);
  c.train.validate();
  c.early_stop.validate();

  std::vector<Vector> training;
  PairDataset pairs;
  const bool pair_task = c.task == "pairs";
  if (pair_task) {
    pairs = build_pair_dataset(split_pairs(file.rows));
    training = pairs.training;
  } else {
    training = file.rows;
  }
  const std::size_t n = training.front().size();
  if (c.n && *c.n != n) {
    throw DataError("config n = " + std::to_string(*c.n) + " but the data has width " +
                    std::to_string(n));
  }
  if (c.m == 0 || c.q == 0) throw UsageError("m and q must be >= 1");
  prepare_out(c.out);

  TrainConfig train = c.train;
  train.seed = derive_seed(c.seed, "train");
  ModelParams params = init_params(n, c.m, c.q, training, train.seed);

  ValidationHook hook;
  std::vector<std::size_t> subset;
  if (pair_task) {
    const std::size_t k = std::min(c.validation_pairs, pairs.size());
    for (std::size_t i = 0; i < k; ++i) subset.push_back(i);
    const std::uint64_t recall_seed = derive_seed(c.seed, "recall");
    hook = [&](const ModelParams& p, std::size_t) {
      return evaluate_recall(p, pairs, c.recall, recall_seed, subset).accuracy;
    };
  }
  const FitResult result = fit(params, training, train, c.early_stop, hook);

  std::string log;
  for (const TrainLogEntry& e : result.log) log += format_log_entry(e) + '\n';
  save_checkpoint(params, c.out / "checkpoint.txt");
  write_text(c.out / "train.log", log);
  out << "epochs " << result.epochs << " stop " << to_string(result.reason)
      << " val " << format_double(result.final_metric) << '\n';
  out << "wrote " << (c.out / "checkpoint.txt").string() << '\n';
  return kExitOk;
}

int cmd_sample(const RunConfig& c, std::ostream& out) {
  const ModelParams params = load_model(c);
  c.train.sampler.validate();
  const std::uint64_t root = derive_seed(c.seed, "sample");
  std::vector<Vector> rows;
  rows.reserve(c.samples);
  for (std::size_t i = 0; i < c.samples; ++i) {
    RandomStream rng(root, i);
    Vector v(params.visible_count());
    for (double& x : v) x = rng.normal();
    ChainState chain{std::move(v), HiddenCode(params.slot_count()), std::move(rng)};
    for (std::size_t s = 0; s < c.sample_steps; ++s) {
      gibbs_sweep(params, chain, c.train.sampler);
    }
    rows.push_back(std::move(chain.v));
  }
  write_rows(c, rows, "samples.txt", out);
  return kExitOk;
}

int cmd_recall(const RunConfig& c, std::ostream& out) {
  const ModelParams params = load_model(c);
  require_path(c.pairs, "pairs");
  const PairDataset ds = load_pairs(c.pairs);
  if (ds.visible_count() != params.visible_count()) {
    throw DataError("model has " + std::to_string(params.visible_count()) +
                    " visibles but the pairs file has width " +
                    std::to_string(ds.visible_count()));
  }
  c.recall.sampler.validate();
  const RecallResult r =
      evaluate_recall(params, ds, c.recall, derive_seed(c.seed, "recall"));
  std::string text = "accuracy " + format_double(r.accuracy) + "\npair retrieved correct\n";
  for (const RecallOutcome& o : r.per_pair) {
    text += std::to_string(o.pair) + ' ' + std::to_string(o.retrieved) + ' ' +
            (o.correct ? "1" : "0") + '\n';
  }
  out << text;
  if (!c.out.empty()) {
    prepare_out(c.out);
    write_text(c.out / "recall.txt", text);
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& c, const std::string& kind, std::ostream& out) {
  SweepSettings s;
  s.train = c.train;
  s.early_stop = c.early_stop;
  s.recall = c.recall;
  s.structure = c.structure;
  s.seeds = c.seeds;
  s.validation_pairs = c.validation_pairs;
  s.threads = c.threads;
  s.train.threads = 1;
  s.train.validate();
  s.early_stop.validate();

  std::vector<SweepRow> rows;
  if (kind == "q") {
    rows = run_q_sweep(c.n_w, c.n_v, c.q_list, c.sizes, s);
  } else {
    rows = run_hidden_sweep(c.n_v, c.q, c.hidden_list, c.sizes, s);
  }
  const std::string table = format_sweep_table(rows);
  out << table;
  if (!c.out.empty()) {
    prepare_out(c.out);
    write_text(c.out / "sweep.csv", table);
  }
  return kExitOk;
}

int cmd_match(const Invocation& inv, const RunConfig& c, std::ostream& out) {
  const MatchMode mode = parse_match_mode(inv.match_mode);
  MatchReport report;
  if (mode == MatchMode::kCapacity) {
    report = capacity_match(c.n.value_or(0), c.m, c.q);
  } else {
    BudgetRounding rounding;
    if (inv.rounding == "table") {
      rounding = BudgetRounding::kTable;
    } else if (inv.rounding == "ceil") {
      rounding = BudgetRounding::kCeiling;
    } else {
      throw UsageError("unknown rounding '" + inv.rounding + "' (expected table or ceil)");
    }
    report = parameter_match(c.n_w, c.n_v, c.q, rounding);
  }
  out << format_match_table(report) << '\n' << format_match_keyvalues(report);
  return kExitOk;
}

double norm(std::span<const double> xs) {
  return std::sqrt(std::inner_product(xs.begin(), xs.end(), xs.begin(), 0.0));
}

int cmd_inspect(const Invocation& inv, const RunConfig& c, std::ostream& out) {
  const ModelParams p = load_model(c);
  std::optional<ExactSummary> summary;
  if (inv.exact) summary = exact_summary(p);
  char buf[256];
  std::snprintf(buf, sizeof buf, "n %zu m %zu q %zu variance %s\n", p.visible_count(),
                p.slot_count(), p.state_count(), p.has_variance() ? "per-dimension" : "unit");
  out << buf;
  const auto w = p.weights();
  double wmax = 0.0;
  for (double x : w) wmax = std::max(wmax, std::abs(x));
  std::snprintf(buf, sizeof buf, "norm b %.6g c %.6g W %.6g max|W| %.6g\n",
                norm(p.visible_bias()), norm(p.hidden_bias()), norm(w), wmax);
  out << buf;

  if (summary) {
    const ExactSummary& s = *summary;
    out << "log_partition " << format_double(s.log_partition) << '\n';
    std::vector<std::uint64_t> order(s.hidden_marginal.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t top = std::min<std::size_t>(10, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top),
                      order.end(), [&](std::uint64_t a, std::uint64_t b) {
                        return s.hidden_marginal[a] > s.hidden_marginal[b];
                      });
    for (std::size_t r = 0; r < top; ++r) {
      const HiddenCode h = code_from_index(p, order[r]);
      std::string code;
      for (std::size_t j = 0; j < h.size(); ++j) {
        code += (j ? "," : "") + std::to_string(h.state(j));
      }
      out << "code " << code << " p " << format_double(s.hidden_marginal[order[r]]) << '\n';
    }
  }

  c.train.sampler.validate();
  const EnergyDiagnostics d =
      energy_diagnostics(p, c.train.sampler, c.diag_steps, c.seed);
  std::snprintf(buf, sizeof buf, "energy mean %.6g samples %zu tau %.4g ess %.1f\n",
                d.mean_energy, d.samples, d.integrated_time, d.effective_samples);
  out << buf;
  for (const auto& [lag, rho] : d.autocorrelation) {
    std::snprintf(buf, sizeof buf, "acf lag %zu %.4f\n", lag, rho);
    out << buf;
  }
  return kExitOk;
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  const auto pairs =
      synth_pairs(c.synth_count, c.synth_dim, derive_seed(c.seed, "synth"), c.structure);
  write_rows(c, join_pairs(pairs), "pairs.txt", out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian-multinoulli RBM toolkit", "gmrbm"};
  app.require_subcommand(1);
  app.fallthrough();
  Invocation inv;
  app.add_option("--config", inv.config_path, "key = value config file")->check(CLI::ExistingFile);
  flag(app, inv, "--seed", "seed", "root seed");
  flag(app, inv, "--threads", "threads", "worker threads");
  flag(app, inv, "--out", "out", "output directory");

  CLI::App* train = app.add_subcommand("train", "train a model; writes checkpoint.txt and train.log");
  flag(*train, inv, "--data", "data", "vector file");
  flag(*train, inv, "--task", "task", "vectors or pairs");
  flag(*train, inv, "--m", "m", "hidden slots");
  flag(*train, inv, "--q", "q", "states per slot");
  flag(*train, inv, "--epochs", "max_epochs", "maximum epochs");
  flag(*train, inv, "--lr", "learning_rate", "Adam learning rate");
  flag(*train, inv, "--batch-size", "batch_size", "mini-batch size");
  flag(*train, inv, "--cd-k", "cd_k", "sweeps per negative phase");
  flag(*train, inv, "--sampler", "sampler", "gibbs or gibbs-langevin");
  flag(*train, inv, "--eps", "langevin_eps", "Langevin step size");
  flag(*train, inv, "--checkpoint-every", "checkpoint_every", "epochs between checkpoints");

  CLI::App* sample = app.add_subcommand("sample", "draw visible samples from noise-started chains");
  flag(*sample, inv, "--model", "model", "checkpoint");
  flag(*sample, inv, "--n-samples", "samples", "number of chains");
  flag(*sample, inv, "--steps", "sample_steps", "sweeps per chain");
  flag(*sample, inv, "--sampler", "sampler", "gibbs or gibbs-langevin");
  flag(*sample, inv, "--eps", "langevin_eps", "Langevin step size");

  CLI::App* recall = app.add_subcommand("recall", "clamped recall over a pairs file");
  flag(*recall, inv, "--model", "model", "checkpoint");
  flag(*recall, inv, "--pairs", "pairs", "vector file of [stimulus ; response] rows");
  flag(*recall, inv, "--steps", "recall_steps", "clamped sweeps");
  flag(*recall, inv, "--readout", "readout", "mean or sample");
  flag(*recall, inv, "--metric", "metric", "euclidean or cosine");

  CLI::App* sweep = app.add_subcommand("sweep", "recall sweep over q or hidden slots");
  sweep->add_option("kind", inv.sweep_kind, "q or hidden")
      ->required()
      ->check(CLI::IsMember({"q", "hidden"}));
  flag(*sweep, inv, "--nw", "n_w", "weight budget (q sweep)");
  flag(*sweep, inv, "--nv", "n_v", "visible units");
  flag(*sweep, inv, "--q-list", "q_list", "comma-separated q values");
  flag(*sweep, inv, "--hidden-list", "hidden_list", "comma-separated slot counts");
  flag(*sweep, inv, "--q", "q", "states per slot (hidden sweep)");
  flag(*sweep, inv, "--sizes", "sizes", "comma-separated pair counts");
  flag(*sweep, inv, "--seeds", "seeds", "comma-separated seeds");
  flag(*sweep, inv, "--epochs", "max_epochs", "maximum epochs");
  flag(*sweep, inv, "--lr", "learning_rate", "Adam learning rate");
  flag(*sweep, inv, "--structure", "structure", "random or clustered");

  CLI::App* match = app.add_subcommand("match", "capacity- or parameter-matched sizing");
  match->add_option("--mode", inv.match_mode, "capacity or param")->required();
  flag(*match, inv, "--n", "n", "visible units (capacity mode)");
  flag(*match, inv, "--m", "m", "hidden slots (capacity mode)");
  flag(*match, inv, "--q", "q", "states per slot");
  flag(*match, inv, "--nw", "n_w", "weight budget (param mode)");
  flag(*match, inv, "--nv", "n_v", "visible units (param mode)");
  match->add_option("--rounding", inv.rounding, "table (floor) or ceil");

  CLI::App* inspect = app.add_subcommand("inspect", "model summary and chain diagnostics");
  flag(*inspect, inv, "--model", "model", "checkpoint");
  inspect->add_flag("--exact", inv.exact, "log-partition and top codes by enumeration");
  flag(*inspect, inv, "--diag-steps", "diag_steps", "sweeps in the diagnostic run");

  CLI::App* synth = app.add_subcommand("synth", "write synthetic pairs as a vector file");
  flag(*synth, inv, "--count", "synth_count", "number of pairs");
  flag(*synth, inv, "--dim", "synth_dim", "dimension of each half");
  flag(*synth, inv, "--structure", "structure", "random or clustered");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const RunConfig c = resolve(inv);
    if (train->parsed()) return cmd_train(c, out);
    if (sample->parsed()) return cmd_sample(c, out);
    if (recall->parsed()) return cmd_recall(c, out);
    if (sweep->parsed()) return cmd_sweep(c, inv.sweep_kind, out);
    if (match->parsed()) return cmd_match(inv, c, out);
    if (inspect->parsed()) return cmd_inspect(inv, c, out);
    if (synth->parsed()) return cmd_synth(c, out);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace gmrbm::cli
