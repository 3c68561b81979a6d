#include "hcn/embed/skipgram.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hcn/common/error.hpp"
#include "hcn/common/random.hpp"
#include "hcn/text/tokenize.hpp"

namespace hcn::embed {

void SkipgramConfig::validate() const {
  if (dim == 0) throw ConfigError("skip-gram dim must be positive");
  if (epochs == 0) throw ConfigError("skip-gram epochs must be positive");
  if (window == 0) throw ConfigError("skip-gram window must be positive");
  if (negatives == 0) throw ConfigError("skip-gram negatives must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("skip-gram lr must be positive");
  if (min_ngram == 0 || min_ngram > max_ngram) throw ConfigError("skip-gram n-gram range is empty");
}

namespace {

float sigmoid(float x) {
  if (x >= 0) return 1.0f / (1.0f + std::exp(-x));
  const float e = std::exp(x);
  return e / (1.0f + e);
}

class Model {
 public:
  Model(const std::vector<std::vector<std::string>>& sentences, const SkipgramConfig& cfg) : cfg_(cfg) {
    std::map<std::string, std::size_t> counts;
    for (const auto& s : sentences)
      for (const auto& w : s) ++counts[w];
    if (counts.empty()) throw UsageError("embedding corpus is empty");
    for (const auto& [w, n] : counts) {
      word_id_.emplace(w, words_.size());
      words_.push_back(w);
      counts_.push_back(n);
    }
    std::map<std::string, std::size_t> gram_ids;
    std::vector<std::vector<std::string>> grams(words_.size());
    for (std::size_t w = 0; w < words_.size(); ++w) {
      grams[w] = char_ngrams(words_[w], cfg.min_ngram, cfg.max_ngram);
      for (const auto& g : grams[w]) gram_ids.emplace(g, 0);
    }
    for (auto& [g, id] : gram_ids) {
      id = ngrams_.size();
      ngrams_.push_back(g);
    }
    inputs_.resize(words_.size());
    for (std::size_t w = 0; w < words_.size(); ++w) {
      inputs_[w].push_back(w);
      for (const auto& g : grams[w]) inputs_[w].push_back(words_.size() + gram_ids.at(g));
    }

    Rng rng(cfg.seed);
    const std::size_t rows = words_.size() + ngrams_.size();
    in_.resize(rows * cfg.dim);
    const double bound = 1.0 / static_cast<double>(cfg.dim);
    for (auto& x : in_) x = static_cast<float>(rng.uniform(-bound, bound));
    out_.assign(words_.size() * cfg.dim, 0.0f);

    double total = 0;
    for (auto n : counts_) {
      total += std::pow(static_cast<double>(n), 0.75);
      noise_cdf_.push_back(total);
    }

    for (const auto& s : sentences) {
      std::vector<std::size_t> ids;
      ids.reserve(s.size());
      for (const auto& w : s) ids.push_back(word_id_.at(w));
      corpus_.push_back(std::move(ids));
      tokens_ += s.size();
    }
  }

  std::vector<double> train(const EpochCallback& on_epoch) {
    Rng rng(cfg_.seed ^ 0x5eedULL);
    std::vector<double> losses;
    hidden_.resize(cfg_.dim);
    grad_.resize(cfg_.dim);
    const double budget = static_cast<double>(tokens_) * static_cast<double>(cfg_.epochs);
    double processed = 0;
    for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
      double loss = 0;
      std::size_t pairs = 0;
      for (const auto& sentence : corpus_) {
        for (std::size_t i = 0; i < sentence.size(); ++i) {
          const float lr = static_cast<float>(cfg_.lr * std::max(0.0, 1.0 - processed / budget));
          processed += 1;
          const std::size_t span = 1 + rng.below(cfg_.window);
          const std::size_t lo = i >= span ? i - span : 0;
          const std::size_t hi = std::min(sentence.size() - 1, i + span);
          for (std::size_t c = lo; c <= hi; ++c) {
            if (c == i) continue;
            loss += update(sentence[i], sentence[c], lr, rng);
            ++pairs;
          }
        }
      }
      const double mean = pairs ? loss / static_cast<double>(pairs) : 0.0;
      if (!std::isfinite(mean)) throw NumericError("skip-gram loss diverged in epoch " + std::to_string(epoch + 1));
      losses.push_back(mean);
      if (on_epoch) on_epoch(epoch + 1, mean);
    }
    return losses;
  }

  EmbeddingTable table() const {
    EmbeddingTable t(cfg_.dim);
    std::vector<float> v(cfg_.dim);
    for (std::size_t w = 0; w < words_.size(); ++w) {
      compose(w, v);
      t.add_word(words_[w], v);
    }
    for (std::size_t g = 0; g < ngrams_.size(); ++g) {
      t.add_ngram(ngrams_[g], std::span<const float>(in_.data() + (words_.size() + g) * cfg_.dim, cfg_.dim));
    }
    t.freeze();
    return t;
  }

 private:
  float* in_row(std::size_t r) { return in_.data() + r * cfg_.dim; }
  float* out_row(std::size_t r) { return out_.data() + r * cfg_.dim; }

  void compose(std::size_t word, std::span<float> dst) const {
    std::fill(dst.begin(), dst.end(), 0.0f);
    for (auto r : inputs_[word]) {
      const float* row = in_.data() + r * cfg_.dim;
      for (std::size_t k = 0; k < cfg_.dim; ++k) dst[k] += row[k];
    }
    const float inv = 1.0f / static_cast<float>(inputs_[word].size());
    for (auto& x : dst) x *= inv;
  }

  std::size_t sample_negative(Rng& rng) const {
    const double u = rng.uniform() * noise_cdf_.back();
    const auto it = std::upper_bound(noise_cdf_.begin(), noise_cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - noise_cdf_.begin()), noise_cdf_.size() - 1);
  }

  double binary(std::size_t target, bool label, float lr) {
    float* o = out_row(target);
    float dot = 0;
    for (std::size_t k = 0; k < cfg_.dim; ++k) dot += hidden_[k] * o[k];
    const float p = sigmoid(dot);
    const float alpha = lr * ((label ? 1.0f : 0.0f) - p);
    for (std::size_t k = 0; k < cfg_.dim; ++k) {
      grad_[k] += alpha * o[k];
      o[k] += alpha * hidden_[k];
    }
    const double q = label ? p : 1.0 - p;
    return -std::log(std::max(q, 1e-7));
  }

  double update(std::size_t centre, std::size_t context, float lr, Rng& rng) {
    compose(centre, hidden_);
    std::fill(grad_.begin(), grad_.end(), 0.0f);
    double loss = binary(context, true, lr);
    for (std::size_t n = 0; n < cfg_.negatives; ++n) {
      std::size_t neg = sample_negative(rng);
      // A single-word corpus has no other word to draw.
      if (neg == context && counts_.size() > 1) {
        while (neg == context) neg = sample_negative(rng);
      }
      loss += binary(neg, false, lr);
    }
    const float share = 1.0f / static_cast<float>(inputs_[centre].size());
    for (auto r : inputs_[centre]) {
      float* row = in_row(r);
      for (std::size_t k = 0; k < cfg_.dim; ++k) row[k] += share * grad_[k];
    }
    return loss;
  }

  SkipgramConfig cfg_;
  std::vector<std::string> words_;
  std::map<std::string, std::size_t> word_id_;
  std::vector<std::size_t> counts_;
  std::vector<std::string> ngrams_;
  std::vector<std::vector<std::size_t>> inputs_;
  std::vector<float> in_, out_;
  std::vector<double> noise_cdf_;
  std::vector<std::vector<std::size_t>> corpus_;
  std::size_t tokens_ = 0;
  std::vector<float> hidden_, grad_;
};

}  // namespace

SkipgramResult train_subword_skipgram(const std::vector<std::vector<std::string>>& sentences,
                                      const SkipgramConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  Model model(sentences, config);
  auto losses = model.train(on_epoch);
  return SkipgramResult{model.table(), std::move(losses)};
}

std::vector<std::vector<std::string>> embedding_corpus(const std::vector<text::Dialogue>& dialogues) {
  std::vector<std::vector<std::string>> out;
  for (const auto& d : dialogues) {
    for (const auto& t : d.turns) {
      if (!t.user_tokens.empty()) out.push_back(t.user_tokens);
      auto sys = text::tokenize(t.raw_system);
      if (!sys.empty()) out.push_back(std::move(sys));
    }
  }
  return out;
}

}  // namespace hcn::embed
