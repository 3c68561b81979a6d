#include <benchmark/benchmark.h>

#include "hcn/common/random.hpp"
#include "hcn/text/corpus.hpp"
#include "hcn/dm/trainer.hpp"
#include "hcn/embed/skipgram.hpp"
#include "hcn/grad/ops.hpp"
#include "hcn/hpo/search.hpp"
#include "synth/synthetic_babi.hpp"

namespace {

using namespace hcn;

grad::Tensor<float> random_tensor(grad::Shape shape, Rng& rng) {
  grad::Tensor<float> t(std::move(shape));
  for (float& v : t.data()) v = static_cast<float>(rng.uniform(-1, 1));
  return t;
}

struct World {
  text::PreparedCorpus corpus;
  embed::EmbeddingTable table;
};

const World& world() {
  static const World w = [] {
    auto split = [](std::size_t n, std::uint64_t s) { return text::parse_dialogues(synth::generate_split(n, s)); };
    auto corpus = text::PreparedCorpus::prepare(split(40, 1), split(10, 2), split(10, 3));
    embed::SkipgramConfig cfg;
    cfg.dim = 64;
    cfg.epochs = 1;
    auto table = embed::train_subword_skipgram(embed::embedding_corpus(corpus.train()), cfg).table;
    return World{std::move(corpus), std::move(table)};
  }();
  return w;
}

dm::ModelConfig config(dm::Featurizer f) {
  dm::ModelConfig c;
  c.featurizer = f;
  c.lstm_size = 128;
  if (f == dm::Featurizer::cnn) {
    c.conv_filters = 16;
    c.conv_keep_prob = 0.8;
  }
  if (f == dm::Featurizer::rnn) {
    c.input_lstm_size = 128;
    c.input_lstm_keep_prob = 0.9;
    c.input_activation = grad::Activation::tanh;
  }
  return c;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto a = random_tensor({n, n}, rng), b = random_tensor({n, n}, rng);
  for (auto _ : state) {
    grad::Graph<float> g;
    const auto out = grad::matmul(g, g.constant_ref(a), g.constant_ref(b));
    benchmark::DoNotOptimize(g.value(out).data().data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128)->Arg(256);

void BM_LstmStepBackward(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  grad::ParameterSet<float> params;
  params.add("wx", random_tensor({h, 4 * h}, rng));
  params.add("wh", random_tensor({h, 4 * h}, rng));
  params.add("b", random_tensor({4 * h}, rng));
  const auto x = random_tensor({h}, rng);
  const auto zero = grad::Tensor<float>(grad::Shape{h});
  for (auto _ : state) {
    grad::Graph<float> g;
    const grad::LstmWeights w{g.parameter(params[0]), g.parameter(params[1]), g.parameter(params[2])};
    grad::LstmState s{g.constant_ref(zero), g.constant_ref(zero)};
    for (int t = 0; t < 8; ++t) s = grad::lstm_step(g, g.constant_ref(x), s, w);
    auto grads = grad::gradients(g, grad::sum(g, s.h), params);
    benchmark::DoNotOptimize(grads[0].data().data());
  }
}
BENCHMARK(BM_LstmStepBackward)->Arg(64)->Arg(256);

void BM_PredictTurn(benchmark::State& state) {
  const auto& w = world();
  const dm::HcnModel m(config(static_cast<dm::Featurizer>(state.range(0))), w.table.dim(), w.corpus.vocab().size(),
                       w.corpus.actions().size());
  const auto& tokens = w.corpus.train()[0].turns[1].user_tokens;
  const auto mask = dm::ActionMask::allow_all(m.action_count());
  for (auto _ : state) {
    auto s = m.initial_state();
    const auto input = m.featurize(tokens, w.table, w.corpus.vocab());
    benchmark::DoNotOptimize(m.predict_turn(input, s, mask).action);
  }
  state.SetLabel(std::string(dm::to_string(m.config().featurizer)));
}
BENCHMARK(BM_PredictTurn)->DenseRange(0, 2);

void BM_TrainEpoch(benchmark::State& state) {
  const auto& w = world();
  dm::HcnModel m(config(static_cast<dm::Featurizer>(state.range(0))), w.table.dim(), w.corpus.vocab().size(),
                 w.corpus.actions().size());
  const auto data = dm::encode_dialogues(m, w.corpus.train(), w.table, w.corpus.vocab());
  dm::TrainOptions opts;
  opts.epochs = 1;
  for (auto _ : state) dm::train_model(m, data, {}, opts);
  state.SetLabel(std::string(dm::to_string(m.config().featurizer)) + ", 40 dialogues");
}
BENCHMARK(BM_TrainEpoch)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_GpSuggest(benchmark::State& state) {
  const auto space = hpo::SearchSpace::for_featurizer(dm::Featurizer::cnn);
  Rng rng(3);
  std::vector<hpo::Trial> history;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    hpo::Trial t;
    t.index = static_cast<std::size_t>(i);
    t.point = hpo::random_suggest(space, rng);
    t.score = rng.uniform();
    history.push_back(t);
  }
  for (auto _ : state) benchmark::DoNotOptimize(hpo::suggest(history, space, rng));
}
BENCHMARK(BM_GpSuggest)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_SkipgramEpoch(benchmark::State& state) {
  const auto sentences = embed::embedding_corpus(world().corpus.train());
  embed::SkipgramConfig cfg;
  cfg.dim = 100;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(embed::train_subword_skipgram(sentences, cfg).table.size());
}
BENCHMARK(BM_SkipgramEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
