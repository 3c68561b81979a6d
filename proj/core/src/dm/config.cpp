#include "hcn/dm/config.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "hcn/common/error.hpp"
#include "hcn/common/io.hpp"
#include "hcn/text/tokenize.hpp"

namespace hcn::dm {

std::string_view to_string(Featurizer f) {
  switch (f) {
    case Featurizer::baseline: return "baseline";
    case Featurizer::cnn: return "cnn";
    case Featurizer::rnn: return "rnn";
  }
  return "baseline";
}

Featurizer parse_featurizer(std::string_view name) {
  if (name == "baseline") return Featurizer::baseline;
  if (name == "cnn") return Featurizer::cnn;
  if (name == "rnn") return Featurizer::rnn;
  throw ConfigError("unknown featurizer '" + std::string(name) + "'");
}

std::vector<std::size_t> ModelConfig::widths() const {
  return conv_widths.value_or(std::vector<std::size_t>{3, 4, 5});
}

namespace {

void check_keep(std::string_view name, double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw ConfigError(std::string(name) + " must lie in (0, 1], got " + std::to_string(p));
  }
}

template <typename V>
void require(bool relevant, const std::optional<V>& field, std::string_view name, Featurizer f) {
  if (relevant && !field) throw ConfigError(std::string(name) + " is required for featurizer " + std::string(to_string(f)));
  if (!relevant && field) {
    throw ConfigError(std::string(name) + " does not apply to featurizer " + std::string(to_string(f)));
  }
}

std::string fmt(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view key, std::string_view s) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view key, std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(std::string(key) + ": not a non-negative integer: '" + std::string(s) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(std::string(key) + ": expected true or false");
}

}  // namespace

void ModelConfig::validate() const {
  const bool cnn = featurizer == Featurizer::cnn;
  const bool rnn = featurizer == Featurizer::rnn;
  require(rnn, input_lstm_size, "input_lstm_size", featurizer);
  require(rnn, input_lstm_keep_prob, "input_lstm_keep_prob", featurizer);
  require(rnn, input_activation, "input_activation", featurizer);
  require(cnn, conv_filters, "conv_filters", featurizer);
  require(cnn, conv_keep_prob, "conv_keep_prob", featurizer);
  if (!cnn && conv_widths) throw ConfigError("conv_widths does not apply to featurizer " + std::string(to_string(featurizer)));

  if (lstm_size == 0) throw ConfigError("lstm_size must be at least 1");
  if (input_lstm_size && *input_lstm_size == 0) throw ConfigError("input_lstm_size must be at least 1");
  if (conv_filters && *conv_filters == 0) throw ConfigError("conv_filters must be at least 1");
  if (conv_widths) {
    if (conv_widths->empty()) throw ConfigError("conv_widths must not be empty");
    for (auto w : *conv_widths)
      if (w == 0) throw ConfigError("conv_widths entries must be at least 1");
  }
  check_keep("lstm_keep_prob", lstm_keep_prob);
  check_keep("fc_keep_prob", fc_keep_prob);
  if (input_lstm_keep_prob) check_keep("input_lstm_keep_prob", *input_lstm_keep_prob);
  if (conv_keep_prob) check_keep("conv_keep_prob", *conv_keep_prob);
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ConfigError("adam_beta1 must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ConfigError("adam_beta2 must lie in [0, 1)");
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (embeddings.empty() || embeddings.find_first_of(" \t\n") != std::string::npos) {
    throw ConfigError("embeddings must be a single word");
  }
}

std::string ModelConfig::serialize() const {
  std::string out;
  auto put = [&](std::string_view k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
  put("featurizer", std::string(to_string(featurizer)));
  put("embeddings", embeddings);
  put("lstm_size", std::to_string(lstm_size));
  if (input_lstm_size) put("input_lstm_size", std::to_string(*input_lstm_size));
  if (conv_filters) put("conv_filters", std::to_string(*conv_filters));
  if (conv_widths) {
    std::string w;
    for (std::size_t i = 0; i < conv_widths->size(); ++i) w += (i ? "," : "") + std::to_string((*conv_widths)[i]);
    put("conv_widths", w);
  }
  put("lstm_keep_prob", fmt(lstm_keep_prob));
  if (input_lstm_keep_prob) put("input_lstm_keep_prob", fmt(*input_lstm_keep_prob));
  if (conv_keep_prob) put("conv_keep_prob", fmt(*conv_keep_prob));
  put("fc_keep_prob", fmt(fc_keep_prob));
  put("learning_rate", fmt(learning_rate));
  put("activation", std::string(grad::to_string(activation)));
  if (input_activation) put("input_activation", std::string(grad::to_string(*input_activation)));
  put("adam_eps", fmt(adam_eps));
  put("adam_beta1", fmt(adam_beta1));
  put("adam_beta2", fmt(adam_beta2));
  put("batch_size", std::to_string(batch_size));
  put("clip_norm", fmt(clip_norm));
  put("previous_action", previous_action ? "true" : "false");
  put("seed", std::to_string(seed));
  return out;
}

ModelConfig ModelConfig::parse(std::string_view text) {
  ModelConfig c;
  std::set<std::string> seen;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string_view value = text::trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key " + key);
    if (value.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty value for " + key);

    if (key == "featurizer") c.featurizer = parse_featurizer(value);
    else if (key == "embeddings") c.embeddings = std::string(value);
    else if (key == "lstm_size") c.lstm_size = parse_uint(key, value);
    else if (key == "input_lstm_size") c.input_lstm_size = parse_uint(key, value);
    else if (key == "conv_filters") c.conv_filters = parse_uint(key, value);
    else if (key == "conv_widths") {
      std::vector<std::size_t> widths;
      std::size_t p = 0;
      while (p <= value.size()) {
        std::size_t q = value.find(',', p);
        if (q == std::string_view::npos) q = value.size();
        widths.push_back(parse_uint(key, text::trim(value.substr(p, q - p))));
        p = q + 1;
      }
      c.conv_widths = std::move(widths);
    } else if (key == "lstm_keep_prob") c.lstm_keep_prob = parse_double(key, value);
    else if (key == "input_lstm_keep_prob") c.input_lstm_keep_prob = parse_double(key, value);
    else if (key == "conv_keep_prob") c.conv_keep_prob = parse_double(key, value);
    else if (key == "fc_keep_prob") c.fc_keep_prob = parse_double(key, value);
    else if (key == "learning_rate") c.learning_rate = parse_double(key, value);
    else if (key == "activation") c.activation = grad::parse_activation(value);
    else if (key == "input_activation") c.input_activation = grad::parse_activation(value);
    else if (key == "adam_eps") c.adam_eps = parse_double(key, value);
    else if (key == "adam_beta1") c.adam_beta1 = parse_double(key, value);
    else if (key == "adam_beta2") c.adam_beta2 = parse_double(key, value);
    else if (key == "batch_size") c.batch_size = parse_uint(key, value);
    else if (key == "clip_norm") c.clip_norm = parse_double(key, value);
    else if (key == "previous_action") c.previous_action = parse_bool(key, value);
    else if (key == "seed") c.seed = parse_uint(key, value);
    else throw ConfigError("line " + std::to_string(line_no) + ": unknown key " + key);
  }
  c.validate();
  return c;
}

ModelConfig ModelConfig::load(const std::string& path) {
  try {
    return parse(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace hcn::dm
