#include "confls/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "confls/errors.hpp"
#include "confls/random.hpp"
#include "confls/text_io.hpp"

namespace confls {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::ce: return "ce";
    case LossKind::ls: return "ls";
    case LossKind::mcls: return "mcls";
    case LossKind::hcls: return "hcls";
  }
  return "?";
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::iid: return "iid";
    case Strategy::mccl: return "mccl";
    case Strategy::hccl: return "hccl";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view text) {
  for (auto k : {LossKind::ce, LossKind::ls, LossKind::mcls, LossKind::hcls}) {
    if (text == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown loss '" + std::string(text) + "' (expected ce, ls, mcls or hcls)");
}

Strategy parse_strategy(std::string_view text) {
  for (auto s : {Strategy::iid, Strategy::mccl, Strategy::hccl}) {
    if (text == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown strategy '" + std::string(text) + "' (expected iid, mccl or hccl)");
}

double lr_at(int epoch, const TrainConfig& cfg) {
  const int decays = epoch / cfg.lr_decay_every;
  return cfg.learning_rate * std::pow(cfg.lr_decay_factor, decays);
}

namespace {

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be positive");
  if (!(cfg.learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be non-negative");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (!(cfg.lr_decay_factor > 0.0)) throw std::invalid_argument("lr decay factor must be positive");
  if (cfg.lr_decay_every < 1) throw std::invalid_argument("lr decay interval must be at least 1 epoch");
  if (!(cfg.smoothing.alpha >= 0.0 && cfg.smoothing.alpha < 1.0)) {
    throw std::invalid_argument("smoothing alpha must lie in [0, 1)");
  }
  if (!(cfg.smoothing.gamma >= 0.0)) throw std::invalid_argument("smoothing gamma must be non-negative");
  if (cfg.strategy != Strategy::iid) {
    if (!(cfg.curriculum.easy_ratio > 0.0 && cfg.curriculum.easy_ratio <= 1.0)) {
      throw std::invalid_argument("curriculum easy ratio must lie in (0, 1]");
    }
    if (cfg.curriculum.end_epoch < 1) throw std::invalid_argument("curriculum ending epoch must be at least 1");
  }
}

const ConfidenceTable& require(const ConfidenceTable* table, ConfidenceKind kind, std::string_view why) {
  if (table == nullptr) {
    throw DataError(std::string(why) + " requires a " + std::string(to_string(kind)) + " confidence table");
  }
  if (table->kind() != kind) {
    throw DataError(std::string(why) + " requires a " + std::string(to_string(kind)) +
                    " confidence table, got a " + std::string(to_string(table->kind())) + " table");
  }
  return *table;
}

}  // namespace

Trainer::Trainer(const Dataset& dataset, TrainConfig cfg, const ConfidenceTable* model_confidence,
                 const ConfidenceTable* human_confidence)
    : dataset_(dataset), cfg_(std::move(cfg)), labels_(modal_labels(dataset)) {
  validate(cfg_);
  if (dataset_.size() == 0) throw DataError("cannot train on an empty dataset");

  const bool need_model = cfg_.loss == LossKind::mcls || cfg_.strategy == Strategy::mccl;
  const bool need_human = cfg_.loss == LossKind::hcls || cfg_.strategy == Strategy::hccl;
  if (need_model) {
    const auto why = cfg_.loss == LossKind::mcls ? "loss mcls" : "strategy mccl";
    model_entries_ = join(require(model_confidence, ConfidenceKind::model, why), dataset_);
  }
  if (need_human) {
    const auto why = cfg_.loss == LossKind::hcls ? "loss hcls" : "strategy hccl";
    human_entries_ = join(require(human_confidence, ConfidenceKind::human, why), dataset_);
  }
  if (cfg_.strategy != Strategy::iid) {
    const auto& entries = cfg_.strategy == Strategy::mccl ? model_entries_ : human_entries_;
    scores_.reserve(entries.size());
    for (const auto* e : entries) scores_.push_back(e->scalar);
  }
}

TrainState Trainer::initial_state() const {
  std::vector<std::size_t> dims;
  dims.push_back(dataset_.feature_dim());
  dims.insert(dims.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  dims.push_back(dataset_.num_classes());

  TrainState state;
  state.model = init_model(dims, derive_seed(cfg_.seed, 21));
  state.velocity = zeros_like(state.model);
  if (cfg_.strategy != Strategy::iid) {
    const auto criterion = cfg_.strategy == Strategy::mccl ? ConfidenceKind::model : ConfidenceKind::human;
    state.schedule.emplace(scores_, cfg_.curriculum.easy_ratio, cfg_.curriculum.end_epoch, criterion);
  }
  return state;
}

ProbVector Trainer::target_for(std::size_t i) const {
  ProbVector p = one_hot(labels_[i], dataset_.num_classes());
  switch (cfg_.loss) {
    case LossKind::ce: return p;
    case LossKind::ls: return uniform_smooth(p, cfg_.smoothing.alpha);
    case LossKind::mcls: return mc_smooth(p, model_entries_[i]->vector, cfg_.smoothing);
    case LossKind::hcls: return hc_smooth(p, human_entries_[i]->vector, cfg_.smoothing);
  }
  return p;
}

EpochRecord Trainer::run_epoch(TrainState& state) const {
  const std::size_t n = dataset_.size();
  const bool gated = cfg_.strategy != Strategy::iid && state.schedule.has_value();
  const double mu = gated ? state.schedule->mu() : 0.0;
  const double lr = lr_at(state.epoch, cfg_);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(cfg_.seed, 1000 + static_cast<std::uint64_t>(state.epoch)));
  rng.shuffle(order);

  double loss_sum = 0.0;
  std::size_t included_total = 0;
  std::size_t correct = 0;
  std::vector<ProbVector> targets;
  std::vector<BatchItem> items;

  for (std::size_t start = 0; start < n; start += cfg_.batch_size) {
    const std::size_t stop = std::min(n, start + cfg_.batch_size);
    targets.clear();
    items.clear();
    targets.reserve(stop - start);
    std::size_t included = 0;
    for (std::size_t k = start; k < stop; ++k) {
      const std::size_t i = order[k];
      const bool in = !gated || is_included(scores_[i], mu);
      included += in ? 1 : 0;
      if (forward(state.model, dataset_[i].features).argmax() == labels_[i]) ++correct;
      // reserve() above keeps these addresses stable.
      targets.push_back(target_for(i));
      items.push_back({dataset_[i].features, &targets.back(), in});
    }
    if (included == 0) continue;  // every sample gated: no step

    const GradientResult g = gradient(state.model, items);
    loss_sum += g.loss * static_cast<double>(g.included);
    included_total += g.included;
    sgd_step(state.model, g.grads, state.velocity, lr, cfg_.momentum);
  }

  EpochRecord record;
  record.epoch = state.epoch;
  record.lr = lr;
  record.mu = mu;
  record.included_fraction = static_cast<double>(included_total) / static_cast<double>(n);
  record.loss = included_total > 0 ? loss_sum / static_cast<double>(included_total) : 0.0;
  record.train_acc = static_cast<double>(correct) / static_cast<double>(n);

  if (!std::isfinite(record.loss) || !state.model.all_finite()) {
    throw NumericalError("non-finite loss or parameters at epoch " + std::to_string(state.epoch) +
                         " (lr " + format_double(lr) + ")");
  }
  if (gated) state.schedule->advance();
  ++state.epoch;
  return record;
}

TrainResult Trainer::train() const {
  TrainState state = initial_state();
  TrainHistory history;
  history.reserve(static_cast<std::size_t>(cfg_.epochs));
  for (int e = 0; e < cfg_.epochs; ++e) history.push_back(run_epoch(state));
  return {std::move(state.model), std::move(history)};
}

std::string serialize_history(const TrainHistory& history) {
  std::string out;
  for (const auto& r : history) {
    nlohmann::ordered_json j;
    j["epoch"] = r.epoch;
    j["lr"] = r.lr;
    j["mu"] = r.mu;
    j["included_fraction"] = r.included_fraction;
    j["loss"] = r.loss;
    j["train_acc"] = r.train_acc;
    out += j.dump();
    out += '\n';
  }
  return out;
}

TrainHistory parse_history(std::string_view text, const std::string& source) {
  TrainHistory history;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      const auto j = nlohmann::json::parse(lines[i]);
      history.push_back({j.at("epoch").get<int>(), j.at("lr").get<double>(), j.at("mu").get<double>(),
                         j.at("included_fraction").get<double>(), j.at("loss").get<double>(),
                         j.at("train_acc").get<double>()});
    } catch (const std::exception& e) {
      throw DataError(source + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return history;
}

void save_history(const TrainHistory& history, const std::filesystem::path& path) {
  write_file(path, serialize_history(history));
}

}  // namespace confls
