// Copyright 2026 The awrs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <awrs/toylm.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include <awrs/errors.hpp>

namespace awrs {

namespace {

std::string context_key(const Vocabulary& vocab, const TokenString& context) {
  std::string key;
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (i > 0) {
      key += ' ';
    }
    key += vocab.name(context[i]);
  }
  return key;
}

TokenString parse_context_key(const Vocabulary& vocab, std::string_view key) {
  TokenString context;
  std::istringstream in{std::string{key}};
  std::string symbol;
  while (in >> symbol) {
    const auto token = vocab.find(symbol);
    if (!token || *token == vocab.eos()) {
      throw ConfigError("model: unknown context symbol '" + symbol + "'");
    }
    context.push_back(*token);
  }
  return context;
}

}  // namespace

ToyLM::ToyLM(Vocabulary vocab, std::size_t order, std::size_t max_len, std::map<TokenString, Categorical> tables)
    : vocab_{std::move(vocab)},
      order_{order},
      max_len_{max_len},
      tables_{std::move(tables)},
      forced_eos_{Categorical::point_mass(vocab_.size(), vocab_.eos())} {
  if (max_len_ == 0) {
    throw ConfigError("model: max_len must be positive");
  }
  for (const auto& [context, dist] : tables_) {
    if (context.size() > order_) {
      throw ConfigError("model: context longer than the model order");
    }
    if (dist.vocab_size() != vocab_.size()) {
      throw ConfigError("model: table width does not match alphabet + eos");
    }
  }
}

ToyLM ToyLM::two_symbol() {
  Vocabulary vocab{{"a", "b"}};
  std::map<TokenString, Categorical> tables;
  const std::vector<double> root{0.9, 0.1, 0.0};
  const std::vector<double> after_a{0.01, 0.99, 0.0};
  const std::vector<double> after_b{0.99, 0.01, 0.0};
  tables.emplace(TokenString{}, normalize(root));
  tables.emplace(TokenString{0}, normalize(after_a));
  tables.emplace(TokenString{1}, normalize(after_b));
  return ToyLM{std::move(vocab), 1, 2, std::move(tables)};
}

ToyLM ToyLM::parse_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    Vocabulary vocab{doc.at("alphabet").get<std::vector<std::string>>(), doc.value("eos", std::string{"<eos>"})};
    for (const auto& s : vocab.symbols()) {
      if (s.find(' ') != std::string::npos) {
        throw ConfigError("model: symbols may not contain spaces");
      }
    }
    const auto order = doc.at("k").get<std::size_t>();
    const auto max_len = doc.at("max_len").get<std::size_t>();
    std::map<TokenString, Categorical> tables;
    for (const auto& [key, probs] : doc.at("tables").items()) {
      const auto weights = probs.get<std::vector<double>>();
      if (weights.size() != vocab.size()) {
        throw ConfigError("model: table '" + key + "' must list alphabet + eos probabilities");
      }
      double total = 0.0;
      for (const double w : weights) {
        total += w;
      }
      if (std::abs(total - 1.0) > 1e-6) {
        throw ConfigError("model: table '" + key + "' does not sum to 1");
      }
      tables.emplace(parse_context_key(vocab, key), normalize(weights));
    }
    return ToyLM{std::move(vocab), order, max_len, std::move(tables)};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string{"model json: "} + e.what());
  }
}

ToyLM ToyLM::load(const std::filesystem::path& path) {
  std::ifstream in{path};
  if (!in) {
    throw ConfigError("cannot open model file " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json(buffer.str());
}

std::string ToyLM::to_json() const {
  nlohmann::json doc;
  doc["alphabet"] = vocab_.symbols();
  doc["eos"] = vocab_.eos_name();
  doc["k"] = order_;
  doc["max_len"] = max_len_;
  nlohmann::json tables = nlohmann::json::object();
  for (const auto& [context, dist] : tables_) {
    tables[context_key(vocab_, context)] = std::vector<double>(dist.probs().begin(), dist.probs().end());
  }
  doc["tables"] = std::move(tables);
  return doc.dump(2);
}

const Categorical& ToyLM::next_dist(std::span<const Token> prefix) const {
  if (prefix.size() > max_len_) {
    throw PrefixTooLong("prefix of length " + std::to_string(prefix.size()) + " exceeds max_len " +
                        std::to_string(max_len_));
  }
  if (prefix.size() == max_len_) {
    return forced_eos_;
  }
  const std::size_t len = std::min(order_, prefix.size());
  const TokenString context(prefix.end() - static_cast<std::ptrdiff_t>(len), prefix.end());
  const auto it = tables_.find(context);
  if (it == tables_.end()) {
    throw ConfigError("model: no table for context '" + context_key(vocab_, context) + "'");
  }
  return it->second;
}

double ToyLM::string_prob(std::span<const Token> s) const {
  if (s.size() > max_len_) {
    throw PrefixTooLong("string longer than max_len");
  }
  double p = prefix_prob(s);
  if (p == 0.0) {
    return 0.0;
  }
  return p * next_dist(s)[eos()];
}

double ToyLM::prefix_prob(std::span<const Token> prefix) const {
  if (prefix.size() > max_len_) {
    throw PrefixTooLong("prefix longer than max_len");
  }
  double p = 1.0;
  for (std::size_t i = 0; i < prefix.size() && p > 0.0; ++i) {
    if (prefix[i] == eos()) {
      return 0.0;
    }
    p *= next_dist(prefix.first(i))[prefix[i]];
  }
  return p;
}

ToyLM random_lm(std::uint64_t seed, std::size_t alphabet, std::size_t order, std::size_t max_len) {
  if (alphabet == 0) {
    throw ConfigError("random_lm: alphabet must be non-empty");
  }
  std::vector<std::string> symbols;
  for (std::size_t i = 0; i < alphabet; ++i) {
    symbols.push_back(alphabet <= 26 ? std::string(1, static_cast<char>('a' + i)) : "s" + std::to_string(i));
  }
  Vocabulary vocab{std::move(symbols)};
  Rng rng{seed, stream_id(0x746f796c6dULL, alphabet, order)};
  std::map<TokenString, Categorical> tables;
  std::vector<double> weights(vocab.size());
  // Contexts enumerated by length then lexicographically, so the draw order is fixed.
  std::vector<TokenString> frontier{TokenString{}};
  for (std::size_t len = 0; len <= order; ++len) {
    std::vector<TokenString> next;
    for (const auto& context : frontier) {
      for (double& w : weights) {
        w = rng.exponential();
      }
      tables.emplace(context, normalize(weights));
      if (len < order) {
        for (Token t = 0; t < alphabet; ++t) {
          auto extended = context;
          extended.push_back(t);
          next.push_back(std::move(extended));
        }
      }
    }
    frontier = std::move(next);
  }
  return ToyLM{std::move(vocab), order, max_len, std::move(tables)};
}

std::vector<WeightedString> enumerate_support(const ToyLM& lm) {
  if (lm.max_len() > kMaxEnumerationLength) {
    throw EnumerationLimit("enumeration refuses max_len > " + std::to_string(kMaxEnumerationLength));
  }
  std::vector<WeightedString> out;
  TokenString prefix;
  const Token eos = lm.eos();
  std::function<void(double)> visit = [&](double prefix_p) {
    const auto& dist = lm.next_dist(prefix);
    for (Token t = 0; t < dist.vocab_size(); ++t) {
      const double p = dist[t];
      if (p == 0.0) {
        continue;
      }
      if (t == eos) {
        if (out.size() >= kMaxEnumerationStrings) {
          throw EnumerationLimit("support exceeds " + std::to_string(kMaxEnumerationStrings) + " strings");
        }
        out.push_back({prefix, prefix_p * p});
      } else {
        prefix.push_back(t);
        visit(prefix_p * p);
        prefix.pop_back();
      }
    }
  };
  visit(1.0);
  return out;
}

}  // namespace awrs
