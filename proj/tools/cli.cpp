#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include <CLI11.hpp>

#include "confls/calibration.hpp"
#include "confls/confidence.hpp"
#include "confls/dataset.hpp"
#include "confls/errors.hpp"
#include "confls/model.hpp"
#include "confls/text_io.hpp"
#include "confls/trainer.hpp"
#include "manifest.hpp"

namespace confls::cli {

namespace fs = std::filesystem;

namespace {

template <typename T>
std::string to_text(const T& value) {
  if constexpr (std::is_same_v<T, std::string>) {
    return value;
  } else if constexpr (std::is_floating_point_v<T>) {
    return format_double(value);
  } else {
    return std::to_string(value);
  }
}

/// Registers options on a subcommand and remembers how to print each one
/// back, so the manifest holds every flag after defaulting.
class FlagSet {
 public:
  explicit FlagSet(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    entries_.emplace_back(name, [&var] { return to_text(var); });
    return app_->add_option("--" + name, var, help)->capture_default_str();
  }

  template <typename T>
  CLI::Option* required(const std::string& name, T& var, const std::string& help) {
    return add(name, var, help)->required();
  }

  [[nodiscard]] std::vector<std::pair<std::string, std::string>> resolved() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, get] : entries_) out.emplace_back(name, get());
    return out;
  }

  [[nodiscard]] CLI::App* app() const { return app_; }

 private:
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<std::string()>>> entries_;
};

fs::path output_path(const std::string& given) {
  fs::path p(given);
  if (const char* dir = std::getenv(kOutDirEnv); dir != nullptr && *dir != '\0' && p.is_relative()) {
    return fs::path(dir) / p;
  }
  return p;
}

std::vector<std::size_t> parse_hidden(const std::string& text) {
  std::vector<std::size_t> dims;
  if (text.empty() || text == "none") return dims;
  std::stringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(token, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != token.size() || v <= 0) {
      throw std::invalid_argument("--hidden expects comma-separated positive widths or 'none', got '" + text + "'");
    }
    dims.push_back(static_cast<std::size_t>(v));
  }
  return dims;
}

struct TrainFlags {
  int epochs = 30;
  std::size_t batch_size = 32;
  double lr = 0.1;
  double momentum = 0.9;
  double lr_decay = 0.1;
  int lr_decay_every = 10;
  std::string hidden = "32";
  std::uint64_t seed = 0;

  void add_to(FlagSet& flags) {
    flags.add("epochs", epochs, "Training epochs");
    flags.add("batch-size", batch_size, "Mini-batch size");
    flags.add("lr", lr, "Initial learning rate");
    flags.add("momentum", momentum, "SGD momentum");
    flags.add("lr-decay", lr_decay, "Learning-rate multiplier applied every --lr-decay-every epochs");
    flags.add("lr-decay-every", lr_decay_every, "Epochs between learning-rate decays");
    flags.add("hidden", hidden, "Hidden layer widths, comma-separated, or 'none'");
    flags.add("seed", seed, "Seed for initialization and shuffling");
  }

  [[nodiscard]] TrainConfig config() const {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = batch_size;
    cfg.learning_rate = lr;
    cfg.momentum = momentum;
    cfg.lr_decay_factor = lr_decay;
    cfg.lr_decay_every = lr_decay_every;
    cfg.hidden = parse_hidden(hidden);
    cfg.seed = seed;
    return cfg;
  }
};

/// A parsed command ready to execute.
struct Command {
  std::string name;
  std::unique_ptr<FlagSet> flags;
  /// Writes the manifest, then every output.
  std::function<void(const FlagSet&)> execute;
};

RunManifest base_manifest(const std::string& command, std::uint64_t seed, const FlagSet& flags) {
  RunManifest m;
  m.tool_version = kToolVersion;
  m.command = command;
  m.seed = seed;
  m.flags = flags.resolved();
  return m;
}

void add_input(RunManifest& m, const std::string& flag, const std::string& path) {
  if (!fs::exists(path)) throw DataError("input file not found: " + path + " (--" + flag + ")");
  m.inputs.push_back({flag, path, file_digest(path)});
}

void write_manifest_for(RunManifest& m, const fs::path& primary) {
  save_manifest(m, fs::path(primary.string() + ".manifest.json"));
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

void register_gen_data(CLI::App& app, std::vector<Command>& commands, std::ostream& out) {
  auto* sub = app.add_subcommand("gen-data", "Generate a synthetic multi-rater dataset");
  auto flags = std::make_unique<FlagSet>(sub);
  auto cfg = std::make_shared<SyntheticConfig>();
  auto out_path = std::make_shared<std::string>();
  flags->required("classes", cfg->num_classes, "Number of classes");
  flags->required("per-class", cfg->samples_per_class, "Samples per class");
  flags->required("dim", cfg->feature_dim, "Feature dimension");
  flags->required("raters", cfg->rater_count, "Simulated raters per sample");
  flags->required("noise", cfg->noise, "Probability a rater votes off-class, in [0, 1]");
  flags->add("seed", cfg->seed, "Generator seed");
  flags->add("centroid-spread", cfg->centroid_spread, "Std. dev. of centroid coordinates");
  flags->add("cluster-stddev", cfg->cluster_stddev, "Std. dev. of each class cluster");
  flags->required("out", *out_path, "Output dataset file");

  commands.push_back({"gen-data", std::move(flags), [cfg, out_path, &out](const FlagSet& flags) {
                        const Dataset data = generate_synthetic(*cfg);
                        const fs::path dest = output_path(*out_path);
                        RunManifest m = base_manifest("gen-data", cfg->seed, flags);
                        m.outputs = {dest.string()};
                        write_manifest_for(m, dest);
                        save_dataset(data, dest);
                        out << "wrote " << data.size() << " samples to " << dest.string() << "\n";
                      }});
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

void register_split(CLI::App& app, std::vector<Command>& commands, std::ostream& out) {
  auto* sub = app.add_subcommand("split", "Shuffle and partition a dataset into train and test files");
  auto flags = std::make_unique<FlagSet>(sub);
  struct Args {
    std::string data, train_out, test_out;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
  };
  auto a = std::make_shared<Args>();
  flags->required("data", a->data, "Input dataset file");
  flags->add("train-fraction", a->train_fraction, "Fraction of samples kept for training");
  flags->add("seed", a->seed, "Shuffle seed");
  flags->required("train-out", a->train_out, "Output training dataset");
  flags->required("test-out", a->test_out, "Output test dataset");

  commands.push_back({"split", std::move(flags), [a, &out](const FlagSet& flags) {
                        RunManifest m = base_manifest("split", a->seed, flags);
                        add_input(m, "data", a->data);
                        const Dataset data = load_dataset(a->data);
                        auto [train, test] = split(data, a->train_fraction, a->seed);
                        const fs::path train_dest = output_path(a->train_out);
                        const fs::path test_dest = output_path(a->test_out);
                        m.outputs = {train_dest.string(), test_dest.string()};
                        write_manifest_for(m, train_dest);
                        save_dataset(train, train_dest);
                        save_dataset(test, test_dest);
                        out << "split " << data.size() << " samples into " << train.size() << " train / "
                            << test.size() << " test\n";
                      }});
}

// ---------------------------------------------------------------------------
// precompute-confidence
// ---------------------------------------------------------------------------

void register_precompute(CLI::App& app, std::vector<Command>& commands, std::ostream& out) {
  auto* sub = app.add_subcommand("precompute-confidence",
                                 "Write a model-confidence (baseline run) or human-confidence sidecar");
  auto flags = std::make_unique<FlagSet>(sub);
  struct Args {
    std::string data, kind, out;
    TrainFlags train;
  };
  auto a = std::make_shared<Args>();
  flags->required("data", a->data, "Dataset file");
  flags->required("kind", a->kind, "model or human")->check(CLI::IsMember({"model", "human"}));
  flags->required("out", a->out, "Output sidecar file");
  a->train.add_to(*flags);

  commands.push_back({"precompute-confidence", std::move(flags), [a, &out](const FlagSet& flags) {
                        RunManifest m = base_manifest("precompute-confidence", a->train.seed, flags);
                        add_input(m, "data", a->data);
                        const Dataset data = load_dataset(a->data);
                        const fs::path dest = output_path(a->out);
                        m.outputs = {dest.string()};
                        const ConfidenceKind kind = parse_confidence_kind(a->kind);
                        TrainConfig cfg = a->train.config();
                        write_manifest_for(m, dest);
                        if (kind == ConfidenceKind::human) {
                          save_table(human_confidence_table(data), dest);
                        } else {
                          cfg.loss = LossKind::ce;
                          cfg.strategy = Strategy::iid;
                          const TrainResult baseline = train(data, cfg);
                          save_table(precompute_model_confidence(baseline.model, data), dest);
                        }
                        out << "wrote " << a->kind << " confidence for " << data.size() << " samples to "
                            << dest.string() << "\n";
                      }});
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

void register_train(CLI::App& app, std::vector<Command>& commands, std::ostream& out) {
  auto* sub = app.add_subcommand("train", "Train a classifier under one (strategy, loss) cell");
  auto flags = std::make_unique<FlagSet>(sub);
  struct Args {
    std::string data, model_out, history_out;
    std::string strategy = "iid", loss = "ce";
    double alpha = 0.1, gamma = 0.1, r = 0.5;
    int end_epoch = 5;
    std::string model_confidence, human_confidence;
    TrainFlags train;
  };
  auto a = std::make_shared<Args>();
  flags->required("data", a->data, "Training dataset file");
  flags->add("strategy", a->strategy, "iid, mccl or hccl")->check(CLI::IsMember({"iid", "mccl", "hccl"}));
  flags->add("loss", a->loss, "ce, ls, mcls or hcls")->check(CLI::IsMember({"ce", "ls", "mcls", "hcls"}));
  flags->add("alpha", a->alpha, "Base smoothing factor");
  flags->add("gamma", a->gamma, "Confidence weight for mcls/hcls");
  flags->add("r", a->r, "Initial fraction of easy samples (curriculum)");
  flags->add("end-epoch", a->end_epoch, "Epoch from which the whole set is used (curriculum)");
  flags->add("model-confidence", a->model_confidence, "Model-confidence sidecar (mcls, mccl)");
  flags->add("human-confidence", a->human_confidence, "Human-confidence sidecar (hcls, hccl)");
  a->train.add_to(*flags);
  flags->required("model-out", a->model_out, "Output model file");
  flags->required("history-out", a->history_out, "Output training-history file");

  commands.push_back({"train", std::move(flags), [a, &out](const FlagSet& flags) {
                        TrainConfig cfg = a->train.config();
                        cfg.strategy = parse_strategy(a->strategy);
                        cfg.loss = parse_loss_kind(a->loss);
                        cfg.smoothing = {a->alpha, a->gamma};
                        cfg.curriculum = {a->r, a->end_epoch};

                        RunManifest m = base_manifest("train", cfg.seed, flags);
                        add_input(m, "data", a->data);
                        const bool need_model = cfg.loss == LossKind::mcls || cfg.strategy == Strategy::mccl;
                        const bool need_human = cfg.loss == LossKind::hcls || cfg.strategy == Strategy::hccl;
                        auto require_sidecar = [&](const std::string& path, const char* flag) {
                          if (path.empty()) {
                            throw DataError(std::string("--strategy ") + a->strategy + " --loss " + a->loss +
                                            " needs a sidecar via --" + flag);
                          }
                          if (!fs::exists(path)) throw DataError("missing confidence sidecar: " + path);
                          add_input(m, flag, path);
                        };
                        std::optional<ConfidenceTable> model_table, human_table;
                        if (need_model) {
                          require_sidecar(a->model_confidence, "model-confidence");
                          model_table = load_table(a->model_confidence);
                        }
                        if (need_human) {
                          require_sidecar(a->human_confidence, "human-confidence");
                          human_table = load_table(a->human_confidence);
                        }
                        const Dataset data = load_dataset(a->data);
                        const Trainer trainer(data, cfg, model_table ? &*model_table : nullptr,
                                              human_table ? &*human_table : nullptr);

                        const fs::path model_dest = output_path(a->model_out);
                        const fs::path history_dest = output_path(a->history_out);
                        m.outputs = {model_dest.string(), history_dest.string()};
                        write_manifest_for(m, model_dest);
                        const TrainResult result = trainer.train();
                        save_model(result.model, model_dest);
                        save_history(result.history, history_dest);
                        if (!result.history.empty()) {
                          const auto& last = result.history.back();
                          out << "trained " << a->strategy << "+" << a->loss << " for " << result.history.size()
                              << " epochs: loss " << last.loss << ", train acc " << last.train_acc << "\n";
                        }
                      }});
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

void register_evaluate(CLI::App& app, std::vector<Command>& commands, std::ostream& out) {
  auto* sub = app.add_subcommand("evaluate", "Accuracy, ECE and reliability bins of a model on a dataset");
  auto flags = std::make_unique<FlagSet>(sub);
  struct Args {
    std::string model, data, out, reliability_out;
    std::size_t bins = kDefaultBins;
  };
  auto a = std::make_shared<Args>();
  flags->required("model", a->model, "Model file");
  flags->required("data", a->data, "Dataset file");
  flags->add("bins", a->bins, "Number of equal-width confidence bins")->check(CLI::PositiveNumber);
  flags->required("out", a->out, "Output evaluation record (JSON)");
  flags->add("reliability-out", a->reliability_out, "Output reliability CSV (default: <out>.reliability.csv)");

  commands.push_back({"evaluate", std::move(flags), [a, &out](const FlagSet& flags) {
                        if (a->reliability_out.empty()) a->reliability_out = a->out + ".reliability.csv";
                        RunManifest m = base_manifest("evaluate", 0, flags);
                        add_input(m, "model", a->model);
                        add_input(m, "data", a->data);
                        const ModelParams model = load_model(a->model);
                        const Dataset data = load_dataset(a->data);
                        const auto predictions = predict_all(model, data);
                        std::vector<ProbVector> probs;
                        probs.reserve(predictions.size());
                        for (const auto& p : predictions) probs.push_back(p.probs);
                        const auto labels = modal_labels(data);
                        const CalibrationReport report = evaluate_calibration(probs, labels, a->bins);

                        const fs::path dest = output_path(a->out);
                        const fs::path rel_dest = output_path(a->reliability_out);
                        m.outputs = {dest.string(), rel_dest.string()};
                        write_manifest_for(m, dest);
                        write_file(dest, report_json(report) + "\n");
                        reliability_export(report, rel_dest);
                        out << "accuracy " << report.accuracy << ", ECE " << report.ece << " (" << report.num_bins
                            << " bins, n=" << report.n << ")\n";
                      }});
}

int run_parsed(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------
// rerun
// ---------------------------------------------------------------------------

int rerun(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  const RunManifest m = load_manifest(manifest_path);
  if (m.command == "rerun") throw DataError(manifest_path + ": a manifest cannot replay rerun");
  for (const auto& in : m.inputs) {
    if (!fs::exists(in.path)) throw DataError("manifest input missing: " + in.path);
    if (file_digest(in.path) != in.digest) {
      throw DataError("manifest input changed since the recorded run: " + in.path);
    }
  }
  return run_parsed(m.to_args(), out, err);
}

int run_parsed(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Confidence-aware label smoothing and curriculum training toolkit", "confls"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::vector<Command> commands;
  register_gen_data(app, commands, out);
  register_split(app, commands, out);
  register_precompute(app, commands, out);
  register_train(app, commands, out);
  register_evaluate(app, commands, out);

  auto* rerun_cmd = app.add_subcommand("rerun", "Replay a command from its manifest");
  std::string manifest_path;
  rerun_cmd->add_option("--manifest", manifest_path, "Manifest written by an earlier run")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    auto* failing = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << failing->help();
    return kUsage;
  }

  if (rerun_cmd->parsed()) {
    return rerun(manifest_path, out, err);
  }
  for (auto& cmd : commands) {
    if (!cmd.flags->app()->parsed()) continue;
    cmd.execute(*cmd.flags);
    return kSuccess;
  }
  err << "error: no command given\n" << app.help();
  return kUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run_parsed(args, out, err);
  } catch (const NumericalError& e) {
    err << "numerical abort: " << e.what() << "\n";
    return kNumericalAbort;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace confls::cli
