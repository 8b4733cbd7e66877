#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "confls/confidence.hpp"
#include "confls/curriculum.hpp"
#include "confls/dataset.hpp"
#include "confls/model.hpp"
#include "confls/smoothing.hpp"

namespace confls {

enum class LossKind { ce, ls, mcls, hcls };
enum class Strategy { iid, mccl, hccl };

std::string_view to_string(LossKind kind);
std::string_view to_string(Strategy strategy);
/// Throw std::invalid_argument on unknown names.
LossKind parse_loss_kind(std::string_view text);
Strategy parse_strategy(std::string_view text);

struct CurriculumConfig {
  /// Fraction of samples included at epoch 0.
  double easy_ratio = 0.5;
  /// Epoch from which every sample is included.
  int end_epoch = 5;
};

struct TrainConfig {
  int epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  double momentum = 0.9;
  double lr_decay_factor = 0.1;
  int lr_decay_every = 10;
  std::vector<std::size_t> hidden = {32};
  LossKind loss = LossKind::ce;
  Strategy strategy = Strategy::iid;
  SmoothingConfig smoothing{};
  CurriculumConfig curriculum{};
  std::uint64_t seed = 0;
};

/// learning_rate * lr_decay_factor ^ floor(epoch / lr_decay_every).
double lr_at(int epoch, const TrainConfig& cfg);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double mu = 0.0;
  double included_fraction = 1.0;
  /// Mean cross-entropy over the included samples, measured before each
  /// batch's update.
  double loss = 0.0;
  /// Accuracy against modal labels over all samples, same measurement point.
  double train_acc = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

using TrainHistory = std::vector<EpochRecord>;

/// Everything that evolves during training. Copyable, so a run can be
/// snapshotted and continued under a different configuration.
struct TrainState {
  ModelParams model;
  ModelParams velocity;
  std::optional<CurriculumSchedule> schedule;
  int epoch = 0;
};

struct TrainResult {
  ModelParams model;
  TrainHistory history;
};

/// Mini-batch SGD over a fixed dataset with per-epoch target construction
/// and optional confidence-ranked gating.
///
/// Each epoch shuffles with a seed derived from (seed, epoch), builds the
/// target of every sample according to `loss`, excludes samples whose
/// criterion score is below the current threshold, and steps once per batch
/// with at least one included sample. The threshold advances at epoch end.
class Trainer {
 public:
  /// Tables may be null unless the loss or strategy needs them. Throws
  /// std::invalid_argument for an invalid config and DataError for a missing
  /// or mismatched table.
  Trainer(const Dataset& dataset, TrainConfig cfg, const ConfidenceTable* model_confidence = nullptr,
          const ConfidenceTable* human_confidence = nullptr);

  [[nodiscard]] const TrainConfig& config() const noexcept { return cfg_; }
  /// Per-sample ranking scores for the configured strategy (empty for iid).
  [[nodiscard]] const std::vector<double>& scores() const noexcept { return scores_; }

  [[nodiscard]] TrainState initial_state() const;
  /// Runs one epoch and advances `state`. Throws NumericalError if the loss
  /// or any parameter becomes non-finite.
  EpochRecord run_epoch(TrainState& state) const;
  [[nodiscard]] TrainResult train() const;

 private:
  ProbVector target_for(std::size_t i) const;

  const Dataset& dataset_;
  TrainConfig cfg_;
  std::vector<std::size_t> labels_;
  std::vector<const ConfidenceEntry*> model_entries_;
  std::vector<const ConfidenceEntry*> human_entries_;
  std::vector<double> scores_;
};

inline TrainResult train(const Dataset& dataset, const TrainConfig& cfg,
                         const ConfidenceTable* model_confidence = nullptr,
                         const ConfidenceTable* human_confidence = nullptr) {
  return Trainer(dataset, cfg, model_confidence, human_confidence).train();
}

/// One JSON object per line: epoch, lr, mu, included_fraction, loss, train_acc.
std::string serialize_history(const TrainHistory& history);
TrainHistory parse_history(std::string_view text, const std::string& source = "<memory>");
void save_history(const TrainHistory& history, const std::filesystem::path& path);

}  // namespace confls
