#include "hcn/dm/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "hcn/common/error.hpp"
#include "hcn/dm/metrics.hpp"
#include "hcn/grad/adam.hpp"

namespace hcn::dm {

std::vector<EncodedDialogue> encode_dialogues(const HcnModel& model, const std::vector<text::Dialogue>& dialogues,
                                              const embed::EmbeddingTable& table, const text::Vocabulary& vocab) {
  std::vector<EncodedDialogue> out;
  out.reserve(dialogues.size());
  for (const auto& d : dialogues) {
    EncodedDialogue e;
    for (const auto& t : d.turns) {
      e.turns.push_back(model.featurize(t.user_tokens, table, vocab));
      e.tokens.push_back(t.user_tokens);
      e.golds.push_back(t.gold_action);
    }
    out.push_back(std::move(e));
  }
  return out;
}

Evaluation evaluate(const HcnModel& model, const std::vector<EncodedDialogue>& dialogues, const MaskRule& rule) {
  Evaluation ev;
  for (const auto& d : dialogues) {
    DialogueState state = model.initial_state();
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      const MaskContext ctx{t, d.tokens.empty() ? std::span<const std::string>{} : d.tokens[t],
                            state.previous_action, model.action_count()};
      ev.predictions.push_back(model.predict_turn(d.turns[t], state, resolve_mask(rule, ctx)).action);
    }
    ev.golds.insert(ev.golds.end(), d.golds.begin(), d.golds.end());
    ev.lengths.push_back(d.turns.size());
  }
  ev.turn_accuracy = turn_accuracy(ev.predictions, ev.golds);
  ev.dialogue_accuracy = dialogue_accuracy(ev.predictions, ev.golds, ev.lengths);
  return ev;
}

double dialogue_loss(const HcnModel& model, const EncodedDialogue& dialogue, Rng& rng,
                     grad::GradientBuffer<float>* gradients, const MaskRule& rule) {
  Graph<float> g;
  Binding<float> bound(g, model.parameters());
  HcnModel::GraphState state = model.graph_state(g, model.initial_state());
  std::vector<Var> losses;
  for (std::size_t t = 0; t < dialogue.turns.size(); ++t) {
    const MaskContext ctx{t, dialogue.tokens.empty() ? std::span<const std::string>{} : dialogue.tokens[t],
                          state.previous_action, model.action_count()};
    const ActionMask mask = resolve_mask(rule, ctx);
    const Var logits = model.forward_turn(bound, dialogue.turns[t], state, Mode::train, rng);
    const ActionId gold = dialogue.golds[t];
    if (gold >= 0) {
      losses.push_back(grad::softmax_xent(g, logits, static_cast<std::size_t>(gold), mask.flags()).loss);
    }
    state.previous_action = gold;
  }
  if (losses.empty()) return 0.0;
  const Var total = losses.size() == 1 ? losses[0] : grad::add_n(g, std::span<const Var>(losses));
  const Var loss = grad::scale(g, total, 1.0f / static_cast<float>(losses.size()));
  if (gradients) {
    g.backward(loss);
    g.accumulate_into(*gradients);
  }
  return g.value(loss)[0];
}

TrainResult train_model(HcnModel& model, const std::vector<EncodedDialogue>& train,
                        const std::vector<EncodedDialogue>& dev, const TrainOptions& options) {
  if (train.empty()) throw UsageError("no training dialogues");
  const ModelConfig& cfg = model.config();
  auto& params = model.parameters();
  grad::Adam<float> adam(params, grad::AdamConfig{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});
  grad::GradientBuffer<float> grads(params);
  Rng order_rng(cfg.seed * 2 + 1);
  Rng dropout_rng(cfg.seed * 2 + 2);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  TrainResult result;
  std::vector<grad::Tensor<float>> best;
  bool have_best = false;

  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    order_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), b + cfg.batch_size);
      grads.zero();
      try {
        for (std::size_t i = b; i < end; ++i) {
          loss_sum += dialogue_loss(model, train[order[i]], dropout_rng, &grads, options.mask_rule);
        }
      } catch (const NumericError& e) {
        throw NumericError("training diverged in epoch " + std::to_string(epoch) + " batch " +
                           std::to_string(b / cfg.batch_size + 1) + ": " + e.what());
      }
      if (!std::isfinite(loss_sum)) {
        throw NumericError("training diverged in epoch " + std::to_string(epoch) + ": loss is not finite");
      }
      grads.scale(1.0f / static_cast<float>(end - b));
      const double norm = grads.clip_global_norm(cfg.clip_norm);
      if (!std::isfinite(norm)) {
        throw NumericError("training diverged in epoch " + std::to_string(epoch) + ": gradient norm is not finite");
      }
      adam.step(params, grads);
    }

    EpochReport report;
    report.epoch = epoch;
    report.train_loss = loss_sum / static_cast<double>(train.size());
    report.dev_turn_accuracy = evaluate(model, dev.empty() ? train : dev, options.mask_rule).turn_accuracy;
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(report);
    if (!have_best || report.dev_turn_accuracy > result.best_dev_accuracy) {
      have_best = true;
      result.best_epoch = epoch;
      result.best_dev_accuracy = report.dev_turn_accuracy;
      best = params.snapshot();
    }
    if (options.on_epoch && !options.on_epoch(report)) break;
  }
  if (have_best) params.restore(best);
  return result;
}

}  // namespace hcn::dm
