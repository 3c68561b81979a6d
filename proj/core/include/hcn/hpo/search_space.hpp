#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hcn/common/random.hpp"
#include "hcn/dm/config.hpp"

namespace hcn::hpo {

struct Dimension {
  enum class Kind { integer, real, categorical };

  std::string name;
  Kind kind = Kind::real;
  double low = 0, high = 1;
  bool log = false;
  std::vector<std::string> choices;  // categorical only

  static Dimension integer(std::string name, double low, double high, bool log = false);
  static Dimension real(std::string name, double low, double high, bool log = false);
  static Dimension categorical(std::string name, std::vector<std::string> choices);

  /// Width of this dimension in the surrogate's input space.
  std::size_t encoded_width() const { return kind == Kind::categorical ? choices.size() : 1; }
};

/// One value per dimension: the number itself for integer and real
/// dimensions, the choice index for categorical ones.
using Point = std::vector<double>;

/// Box over hyperparameters. Dimension names are ModelConfig keys when the
/// space is used to generate configs; `fixed` holds further keys applied to
/// every generated config.
class SearchSpace {
 public:
  SearchSpace() = default;
  explicit SearchSpace(std::vector<Dimension> dims);

  /// Ranges containing every published configuration of the featurizer.
  static SearchSpace for_featurizer(dm::Featurizer featurizer, const std::string& embeddings = "fasttext");

  /// JSON form:
  ///   {"featurizer": "cnn", "embeddings": "fasttext", "fixed": {"batch_size": 32},
  ///    "dimensions": [{"name": "lstm_size", "type": "int", "low": 32, "high": 512, "log": true},
  ///                   {"name": "activation", "type": "categorical", "choices": ["relu", "tanh"]}, ...]}
  static SearchSpace from_json(const std::string& text);
  static SearchSpace load(const std::filesystem::path& path);
  std::string to_json() const;

  const std::vector<Dimension>& dimensions() const { return dims_; }
  std::size_t size() const { return dims_.size(); }
  std::size_t encoded_size() const;

  Point sample(Rng& rng) const;
  bool contains(const Point& p) const;

  /// Maps to [0,1] per numeric dimension (after log where flagged) and
  /// one-hot per categorical dimension.
  std::vector<double> encode(const Point& p) const;

  /// Human-readable name → value text.
  std::map<std::string, std::string> describe(const Point& p) const;
  Point from_description(const std::map<std::string, std::string>& values) const;

  /// Config generation. Throws ConfigError when the dimensions and fixed keys
  /// do not form a valid config for the featurizer.
  dm::ModelConfig to_config(const Point& p) const;

  dm::Featurizer featurizer = dm::Featurizer::baseline;
  std::string embeddings = "fasttext";
  std::map<std::string, std::string> fixed;

 private:
  std::vector<Dimension> dims_;
};

}  // namespace hcn::hpo
