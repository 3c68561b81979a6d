#include "hcn/hpo/search_space.hpp"

#include <charconv>
#include <cmath>

#include "hcn/common/error.hpp"
#include "hcn/common/io.hpp"
#include "json.hpp"

namespace hcn::hpo {
using nlohmann::json;

namespace {

std::string number_text(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_number(const std::string& name, const std::string& s) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(name + ": not a number: '" + s + "'");
  return v;
}

double to_unit(const Dimension& d, double v) {
  if (d.high == d.low) return 0.5;
  if (d.log) return (std::log(v) - std::log(d.low)) / (std::log(d.high) - std::log(d.low));
  return (v - d.low) / (d.high - d.low);
}

void check_dimension(const Dimension& d) {
  if (d.name.empty()) throw ConfigError("search dimension without a name");
  if (d.kind == Dimension::Kind::categorical) {
    if (d.choices.empty()) throw ConfigError(d.name + ": categorical dimension needs choices");
    return;
  }
  if (!(d.low <= d.high) || !std::isfinite(d.low) || !std::isfinite(d.high)) {
    throw ConfigError(d.name + ": invalid range");
  }
  if (d.log && d.low <= 0) throw ConfigError(d.name + ": log-scaled range must be positive");
  if (d.kind == Dimension::Kind::integer && (d.low != std::floor(d.low) || d.high != std::floor(d.high))) {
    throw ConfigError(d.name + ": integer range needs integer bounds");
  }
}

std::string choice_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return number_text(v.get<double>());
  throw ConfigError("categorical choices must be strings or numbers");
}

}  // namespace

Dimension Dimension::integer(std::string name, double low, double high, bool log) {
  return Dimension{std::move(name), Kind::integer, low, high, log, {}};
}

Dimension Dimension::real(std::string name, double low, double high, bool log) {
  return Dimension{std::move(name), Kind::real, low, high, log, {}};
}

Dimension Dimension::categorical(std::string name, std::vector<std::string> choices) {
  return Dimension{std::move(name), Kind::categorical, 0, 0, false, std::move(choices)};
}

SearchSpace::SearchSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    check_dimension(dims_[i]);
    for (std::size_t j = 0; j < i; ++j) {
      if (dims_[j].name == dims_[i].name) throw ConfigError("duplicate search dimension " + dims_[i].name);
    }
  }
}

SearchSpace SearchSpace::for_featurizer(dm::Featurizer featurizer, const std::string& embeddings) {
  using D = Dimension;
  std::vector<D> dims = {D::integer("lstm_size", 32, 512, true)};
  if (featurizer == dm::Featurizer::rnn) dims.push_back(D::integer("input_lstm_size", 32, 512, true));
  if (featurizer == dm::Featurizer::cnn) dims.push_back(D::integer("conv_filters", 4, 64));
  dims.push_back(D::real("lstm_keep_prob", 0.5, 1.0));
  if (featurizer == dm::Featurizer::rnn) dims.push_back(D::real("input_lstm_keep_prob", 0.5, 1.0));
  if (featurizer == dm::Featurizer::cnn) dims.push_back(D::real("conv_keep_prob", 0.5, 1.0));
  dims.push_back(D::real("fc_keep_prob", 0.5, 1.0));
  dims.push_back(D::real("learning_rate", 1e-5, 1e-2, true));
  dims.push_back(D::categorical("activation", {"relu", "tanh"}));
  if (featurizer == dm::Featurizer::rnn) dims.push_back(D::categorical("input_activation", {"relu", "tanh"}));
  dims.push_back(D::real("adam_eps", 1e-8, 0.1, true));
  dims.push_back(D::categorical("adam_beta1", {"0.5", "0.9"}));
  SearchSpace s(std::move(dims));
  s.featurizer = featurizer;
  s.embeddings = embeddings;
  return s;
}

SearchSpace SearchSpace::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("search space: ") + e.what());
  }
  try {
    std::vector<Dimension> dims;
    for (const auto& d : j.at("dimensions")) {
      const auto type = d.at("type").get<std::string>();
      const auto name = d.at("name").get<std::string>();
      if (type == "categorical") {
        std::vector<std::string> choices;
        for (const auto& c : d.at("choices")) choices.push_back(choice_text(c));
        dims.push_back(Dimension::categorical(name, std::move(choices)));
      } else if (type == "int" || type == "real") {
        const bool log = d.value("log", false);
        const double lo = d.at("low").get<double>(), hi = d.at("high").get<double>();
        dims.push_back(type == "int" ? Dimension::integer(name, lo, hi, log) : Dimension::real(name, lo, hi, log));
      } else {
        throw ConfigError(name + ": unknown dimension type '" + type + "'");
      }
    }
    SearchSpace s(std::move(dims));
    s.featurizer = dm::parse_featurizer(j.value("featurizer", std::string("baseline")));
    s.embeddings = j.value("embeddings", std::string("fasttext"));
    if (j.contains("fixed")) {
      for (const auto& [k, v] : j.at("fixed").items()) s.fixed[k] = v.is_boolean() ? (v.get<bool>() ? "true" : "false") : choice_text(v);
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("search space: ") + e.what());
  }
}

SearchSpace SearchSpace::load(const std::filesystem::path& path) {
  try {
    return from_json(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string SearchSpace::to_json() const {
  json dims = json::array();
  for (const auto& d : dims_) {
    if (d.kind == Dimension::Kind::categorical) {
      dims.push_back({{"name", d.name}, {"type", "categorical"}, {"choices", d.choices}});
    } else {
      dims.push_back({{"name", d.name},
                      {"type", d.kind == Dimension::Kind::integer ? "int" : "real"},
                      {"low", d.low},
                      {"high", d.high},
                      {"log", d.log}});
    }
  }
  json j = {{"featurizer", std::string(dm::to_string(featurizer))}, {"embeddings", embeddings}, {"dimensions", dims}};
  if (!fixed.empty()) j["fixed"] = fixed;
  return j.dump(2) + "\n";
}

std::size_t SearchSpace::encoded_size() const {
  std::size_t n = 0;
  for (const auto& d : dims_) n += d.encoded_width();
  return n;
}

Point SearchSpace::sample(Rng& rng) const {
  Point p(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const Dimension& d = dims_[i];
    switch (d.kind) {
      case Dimension::Kind::categorical:
        p[i] = static_cast<double>(rng.below(d.choices.size()));
        break;
      case Dimension::Kind::real:
        p[i] = d.log ? std::exp(rng.uniform(std::log(d.low), std::log(d.high))) : rng.uniform(d.low, d.high);
        p[i] = std::clamp(p[i], d.low, d.high);
        break;
      case Dimension::Kind::integer: {
        // Each integer owns an equal slice of the (log) axis.
        const double lo = d.log ? std::log(d.low) : d.low;
        const double hi = d.log ? std::log(d.high + 1) : d.high + 1;
        const double u = rng.uniform(lo, hi);
        p[i] = std::clamp(std::floor(d.log ? std::exp(u) : u), d.low, d.high);
        break;
      }
    }
  }
  return p;
}

bool SearchSpace::contains(const Point& p) const {
  if (p.size() != dims_.size()) return false;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const Dimension& d = dims_[i];
    if (!std::isfinite(p[i])) return false;
    if (d.kind == Dimension::Kind::categorical) {
      if (p[i] < 0 || p[i] >= static_cast<double>(d.choices.size()) || p[i] != std::floor(p[i])) return false;
    } else {
      if (p[i] < d.low || p[i] > d.high) return false;
      if (d.kind == Dimension::Kind::integer && p[i] != std::floor(p[i])) return false;
    }
  }
  return true;
}

std::vector<double> SearchSpace::encode(const Point& p) const {
  if (p.size() != dims_.size()) throw DimensionError("point has " + std::to_string(p.size()) + " values, space has " +
                                                     std::to_string(dims_.size()) + " dimensions");
  std::vector<double> out;
  out.reserve(encoded_size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const Dimension& d = dims_[i];
    if (d.kind == Dimension::Kind::categorical) {
      for (std::size_t c = 0; c < d.choices.size(); ++c) out.push_back(static_cast<double>(c) == p[i] ? 1.0 : 0.0);
    } else {
      out.push_back(to_unit(d, p[i]));
    }
  }
  return out;
}

std::map<std::string, std::string> SearchSpace::describe(const Point& p) const {
  if (p.size() != dims_.size()) throw DimensionError("point does not match the search space");
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const Dimension& d = dims_[i];
    switch (d.kind) {
      case Dimension::Kind::categorical: out[d.name] = d.choices.at(static_cast<std::size_t>(p[i])); break;
      case Dimension::Kind::integer: out[d.name] = std::to_string(static_cast<long long>(p[i])); break;
      case Dimension::Kind::real: out[d.name] = number_text(p[i]); break;
    }
  }
  return out;
}

Point SearchSpace::from_description(const std::map<std::string, std::string>& values) const {
  Point p(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const Dimension& d = dims_[i];
    const auto it = values.find(d.name);
    if (it == values.end()) throw ConfigError("missing value for search dimension " + d.name);
    if (d.kind == Dimension::Kind::categorical) {
      const auto c = std::find(d.choices.begin(), d.choices.end(), it->second);
      if (c == d.choices.end()) throw ConfigError(d.name + ": '" + it->second + "' is not one of the choices");
      p[i] = static_cast<double>(c - d.choices.begin());
    } else {
      p[i] = parse_number(d.name, it->second);
    }
  }
  if (!contains(p)) throw ConfigError("point lies outside the search space");
  return p;
}

dm::ModelConfig SearchSpace::to_config(const Point& p) const {
  std::map<std::string, std::string> values = fixed;
  for (auto& [k, v] : describe(p)) values[k] = v;
  values.erase("featurizer");
  values.erase("embeddings");
  std::string text = "featurizer = " + std::string(dm::to_string(featurizer)) + "\nembeddings = " + embeddings + "\n";
  for (const auto& [k, v] : values) text += k + " = " + v + "\n";
  return dm::ModelConfig::parse(text);
}

}  // namespace hcn::hpo
