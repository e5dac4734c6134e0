#pragma once

#include "mxm/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mxm {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment buffers, one per parameter tensor.
struct AdamState {
  AdamConfig config;
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update from the gradient buffers of `params`.
/// Throws std::runtime_error naming the parameter if a gradient is not
/// finite; parameters are left untouched in that case.
void adam_step(ParamStore &params, AdamState &state, double lr);

struct LrSchedule {
  double warmup_epochs = 1.0;
  double decay_ratio = 0.1;
  double decay_epochs = 600.0;
};

/// Linear warmup from 0 to base_lr over the warmup, then
/// base_lr * ratio^(epochs_after_warmup / decay_epochs).
double lr_at(std::uint64_t step, std::uint64_t steps_per_epoch, double base_lr,
             const LrSchedule &schedule = {});

/// shadow <- decay * shadow + (1 - decay) * params
void ema_update(ParamStore &shadow, const ParamStore &params, double decay = 0.999);

struct Metrics {
  double mae = 0.0;
  std::optional<double> std_mae;   // empty when sigma <= 0
  std::optional<double> pearson_r; // empty when either input is constant
};

Metrics metrics(const std::vector<double> &pred, const std::vector<double> &truth,
                double sigma);

enum class LossKind { Mae, Mse };

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t patience = 50;
  std::size_t group = 32; // molecules per optimizer step
  double base_lr = 1e-3;
  LossKind loss = LossKind::Mae;
  std::uint64_t seed = 0;
  LrSchedule schedule;
  AdamConfig adam;
  double ema_decay = 0.999;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0; // mean per-molecule loss over the epoch
  double val_mae = 0.0;    // EMA weights
  double lr = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::optional<std::size_t> best_epoch; // index into epochs

  /// Header plus one row per epoch: epoch,train_loss,val_mae,lr,seconds
  void write_csv(std::ostream &out) const;
};

/// A featurized molecule with its regression target.
struct Sample {
  const Features *features = nullptr;
  double target = 0.0;
};

class TrainingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Training loop state: raw parameters, Adam state, EMA shadow.
class Trainer {
public:
  Trainer(const ModelConfig &model, const TrainConfig &cfg, std::vector<Sample> train,
          std::vector<Sample> validation, std::uint64_t init_seed);

  /// Runs up to cfg.epochs epochs with early stopping on validation MAE.
  TrainReport run();

  /// One pass over the shuffled training set; returns the mean loss.
  double run_epoch();

  /// MAE of the EMA model on the validation samples.
  double validation_mae() const;

  MxmNet &model() { return model_; }
  MxmNet &ema_model() { return ema_; }
  const ParamStore &best_params() const { return best_; }
  std::uint64_t steps_per_epoch() const;
  double last_lr() const { return last_lr_; }

private:
  TrainConfig cfg_;
  MxmNet model_;
  MxmNet ema_;
  AdamState adam_;
  ParamStore best_;
  std::vector<Sample> train_;
  std::vector<Sample> validation_;
  std::uint64_t shuffle_state_;
  double last_lr_ = 0.0;
};

/// Predictions of `net` for each sample, evaluated in parallel.
std::vector<double> predict_all(const MxmNet &net, const std::vector<Sample> &samples);

} // namespace mxm
