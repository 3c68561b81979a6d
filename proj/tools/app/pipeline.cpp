#include "pipeline.hpp"

#include "hcn/common/error.hpp"

namespace hcn::app {

PrepareReport prepare_data(const std::filesystem::path& train, const std::filesystem::path& dev,
                           const std::filesystem::path& test, const std::filesystem::path& out) {
  auto corpus = text::PreparedCorpus::prepare(text::parse_split(train), text::parse_split(dev), text::parse_split(test));
  corpus.write(out);
  return PrepareReport{corpus.stats(text::Split::train), corpus.stats(text::Split::dev),
                       corpus.stats(text::Split::test), corpus.actions().size(), corpus.vocab().size()};
}

embed::SkipgramResult train_embeddings(const std::filesystem::path& corpus, const embed::SkipgramConfig& config,
                                       const std::filesystem::path& out, const embed::EpochCallback& on_epoch) {
  const auto prepared = text::PreparedCorpus::load(corpus);
  auto result = embed::train_subword_skipgram(embed::embedding_corpus(prepared.train()), config, on_epoch);
  embed::write_text_vectors(result.table, out);
  return result;
}

TrainedModel train(const TrainRequest& request, const text::PreparedCorpus& corpus,
                   const embed::EmbeddingTable& embeddings) {
  dm::HcnModel model(request.config, embeddings.dim(), corpus.vocab().size(), corpus.actions().size());
  const auto train_set = dm::encode_dialogues(model, corpus.train(), embeddings, corpus.vocab());
  const auto dev_set = dm::encode_dialogues(model, corpus.dev(), embeddings, corpus.vocab());
  dm::TrainOptions opts;
  opts.epochs = request.epochs;
  opts.on_epoch = request.on_epoch;
  auto result = dm::train_model(model, train_set, dev_set, opts);
  return TrainedModel{std::move(model), std::move(result)};
}

dm::TrainResult train_to_checkpoint(const TrainRequest& request, const text::PreparedCorpus& corpus,
                                    const embed::EmbeddingTable& embeddings, const std::filesystem::path& out) {
  auto trained = train(request, corpus, embeddings);
  dm::save_checkpoint(out, trained.model, corpus.vocab(), corpus.actions(), embeddings,
                      dm::CheckpointInfo{trained.result.best_epoch, trained.result.best_dev_accuracy});
  return std::move(trained.result);
}

dm::Evaluation evaluate_split(const dm::Checkpoint& checkpoint, const text::PreparedCorpus& corpus, text::Split split) {
  dm::check_compatible(checkpoint, corpus.vocab(), corpus.actions());
  const auto data = dm::encode_dialogues(checkpoint.model, corpus.split(split), checkpoint.embeddings, checkpoint.vocab);
  return dm::evaluate(checkpoint.model, data);
}

hpo::SearchResult run_hpo(const HpoRequest& request, const text::PreparedCorpus& corpus,
                          const embed::EmbeddingTable& embeddings) {
  if (request.space.embeddings.empty()) throw ConfigError("search space names no embedding source");
  hpo::SearchOptions opts;
  opts.budget = request.trials;
  opts.seed = request.seed;
  opts.bayesian = request.bayesian;
  opts.history = request.history;
  opts.model_configs = true;
  opts.on_trial = request.on_trial;
  const auto objective = [&](const hpo::Point& p, std::size_t) {
    TrainRequest tr;
    tr.config = request.space.to_config(p);
    tr.epochs = request.epochs;
    return train(tr, corpus, embeddings).result.best_dev_accuracy;
  };
  return hpo::run_search(request.space, objective, opts);
}

}  // namespace hcn::app
