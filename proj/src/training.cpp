#include "mxm/training.hpp"

#include "mxm/parallel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace mxm {

void adam_step(ParamStore &params, AdamState &state, double lr) {
  const auto &entries = params.entries();
  if (state.first.empty()) {
    for (const auto &[name, t] : entries) {
      state.first.emplace_back(t.size(), 0.0);
      state.second.emplace_back(t.size(), 0.0);
    }
  }
  if (state.first.size() != entries.size())
    throw std::invalid_argument("adam_step: state does not match parameter store");

  for (const auto &[name, t] : entries) {
    if (t.grad().size() != t.size())
      throw std::invalid_argument("adam_step: parameter '" + name + "' has no gradient");
    for (double g : t.grad())
      if (!std::isfinite(g))
        throw std::runtime_error("adam_step: non-finite gradient in parameter '" + name + "'");
  }

  ++state.step;
  const auto &c = state.config;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < entries.size(); ++p) {
    ad::Tensor t = entries[p].second;
    auto value = t.data();
    auto grad = t.grad();
    auto &m = state.first[p];
    auto &v = state.second[p];
    if (m.size() != value.size())
      throw std::invalid_argument("adam_step: moment shape mismatch for '" +
                                  entries[p].first + "'");
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

double lr_at(std::uint64_t step, std::uint64_t steps_per_epoch, double base_lr,
             const LrSchedule &schedule) {
  if (steps_per_epoch == 0)
    throw std::invalid_argument("lr_at: steps_per_epoch must be positive");
  const double epoch = static_cast<double>(step) / static_cast<double>(steps_per_epoch);
  if (epoch < schedule.warmup_epochs)
    return base_lr * epoch / schedule.warmup_epochs;
  const double after = epoch - schedule.warmup_epochs;
  return base_lr * std::pow(schedule.decay_ratio, after / schedule.decay_epochs);
}

void ema_update(ParamStore &shadow, const ParamStore &params, double decay) {
  if (shadow.size() != params.size())
    throw std::invalid_argument("ema_update: parameter count differs");
  for (std::size_t p = 0; p < params.size(); ++p) {
    ad::Tensor s = shadow.entries()[p].second;
    const ad::Tensor &v = params.entries()[p].second;
    if (s.shape() != v.shape())
      throw std::invalid_argument("ema_update: shape mismatch at '" +
                                  params.entries()[p].first + "'");
    auto sd = s.data();
    auto vd = v.data();
    for (std::size_t i = 0; i < sd.size(); ++i)
      sd[i] = decay * sd[i] + (1.0 - decay) * vd[i];
  }
}

Metrics metrics(const std::vector<double> &pred, const std::vector<double> &truth,
                double sigma) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("metrics: length mismatch");
  if (pred.empty())
    throw std::invalid_argument("metrics: empty input");
  const auto n = static_cast<double>(pred.size());
  Metrics out;
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    abs_sum += std::abs(pred[i] - truth[i]);
  out.mae = abs_sum / n;
  if (sigma > 0.0)
    out.std_mae = out.mae / sigma;

  if (pred.size() >= 2) {
    const double mp = std::accumulate(pred.begin(), pred.end(), 0.0) / n;
    const double mt = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double dx = pred[i] - mp, dy = truth[i] - mt;
      sxy += dx * dy;
      sxx += dx * dx;
      syy += dy * dy;
    }
    if (sxx > 0.0 && syy > 0.0)
      out.pearson_r = sxy / std::sqrt(sxx * syy);
  }
  return out;
}

void TrainReport::write_csv(std::ostream &out) const {
  out << "epoch,train_loss,val_mae,lr,seconds\n";
  char buf[160];
  for (const auto &r : epochs) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.6f\n", r.epoch,
                  r.train_loss, r.val_mae, r.lr, r.seconds);
    out << buf;
  }
}

std::vector<double> predict_all(const MxmNet &net, const std::vector<Sample> &samples) {
  std::vector<double> out(samples.size());
  parallel_for(samples.size(),
               [&](std::size_t i) { out[i] = predict(net, *samples[i].features); });
  return out;
}

namespace {

std::uint64_t next_random(std::uint64_t &state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace

Trainer::Trainer(const ModelConfig &model, const TrainConfig &cfg,
                 std::vector<Sample> train, std::vector<Sample> validation,
                 std::uint64_t init_seed)
    : cfg_(cfg), model_(MxmNet::init(model, init_seed)),
      ema_(MxmNet::bind(model, model_.params().clone())),
      best_(model_.params().clone()), train_(std::move(train)),
      validation_(std::move(validation)), shuffle_state_(cfg.seed) {
  adam_.config = cfg.adam;
  if (train_.empty())
    throw std::invalid_argument("Trainer: empty training split");
  if (validation_.empty())
    throw std::invalid_argument("Trainer: empty validation split");
  if (cfg_.group == 0)
    throw std::invalid_argument("Trainer: group size must be positive");
}

std::uint64_t Trainer::steps_per_epoch() const {
  return (train_.size() + cfg_.group - 1) / cfg_.group;
}

double Trainer::run_epoch() {
  std::vector<std::size_t> order(train_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[next_random(shuffle_state_) % i]);

  ParamStore &params = model_.params();
  double loss_total = 0.0;
  for (std::size_t start = 0; start < order.size(); start += cfg_.group) {
    const std::size_t stop = std::min(order.size(), start + cfg_.group);
    const double weight = 1.0 / static_cast<double>(stop - start);
    params.zero_grad();
    for (std::size_t k = start; k < stop; ++k) {
      const Sample &s = train_[order[k]];
      ad::Tape tape;
      auto y = forward(tape, model_, *s.features);
      auto diff = ad::sub(tape, y, ad::Tensor::scalar(s.target));
      auto loss = cfg_.loss == LossKind::Mae ? ad::abs(tape, diff)
                                             : ad::mul(tape, diff, diff);
      const double value = loss.item();
      if (!std::isfinite(value))
        throw TrainingError("non-finite loss on molecule '" +
                            std::to_string(order[k]) + "' at optimizer step " +
                            std::to_string(adam_.step + 1));
      loss_total += value;
      tape.backward(ad::scale(tape, loss, weight));
    }
    last_lr_ = lr_at(adam_.step + 1, steps_per_epoch(), cfg_.base_lr, cfg_.schedule);
    adam_step(params, adam_, last_lr_);
    ema_update(ema_.params(), params, cfg_.ema_decay);
  }
  return loss_total / static_cast<double>(train_.size());
}

double Trainer::validation_mae() const {
  auto pred = predict_all(ema_, validation_);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    total += std::abs(pred[i] - validation_[i].target);
  return total / static_cast<double>(pred.size());
}

TrainReport Trainer::run() {
  TrainReport report;
  double best_mae = 0.0;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= cfg_.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = run_epoch();
    rec.val_mae = validation_mae();
    rec.lr = last_lr_;
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.epochs.push_back(rec);

    if (!report.best_epoch || rec.val_mae < best_mae) {
      best_mae = rec.val_mae;
      report.best_epoch = report.epochs.size() - 1;
      best_.copy_values_from(ema_.params());
      since_best = 0;
    } else if (++since_best >= cfg_.patience) {
      break;
    }
  }
  return report;
}

} // namespace mxm
