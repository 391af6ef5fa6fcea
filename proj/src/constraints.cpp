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

#include <awrs/constraints.hpp>

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include <awrs/errors.hpp>

namespace awrs {

TokenConstraint::TokenConstraint(Predicate predicate, std::shared_ptr<EvalCounter> counter)
    : predicate_{std::move(predicate)}, counter_{counter ? std::move(counter) : std::make_shared<EvalCounter>(0)} {}

IncrementalConstraint::IncrementalConstraint(Predicate predicate) {
  binder_ = [fn = std::move(predicate)](std::span<const Token> prefix) -> TokenConstraint::Predicate {
    return [fn, owned = TokenString(prefix.begin(), prefix.end())](Token t) { return fn(owned, t); };
  };
}

IncrementalConstraint IncrementalConstraint::from_binder(Binder binder) {
  IncrementalConstraint c;
  c.binder_ = std::move(binder);
  return c;
}

IncrementalConstraint IncrementalConstraint::vacuous() {
  return from_binder([](std::span<const Token>) -> TokenConstraint::Predicate { return [](Token) { return true; }; });
}

TokenConstraint IncrementalConstraint::at(std::span<const Token> prefix) const {
  return TokenConstraint{binder_(prefix), counter_};
}

bool IncrementalConstraint::operator()(std::span<const Token> prefix, Token token) const { return at(prefix)(token); }

bool IncrementalConstraint::accepts_string(std::span<const Token> s, Token eos) const {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(*this)(s.first(i), s[i])) {
      return false;
    }
  }
  return (*this)(s, eos);
}

struct TrieLanguage::Impl {
  struct Node {
    std::map<Token, std::size_t> children;
    bool terminal = false;
  };
  std::vector<Node> nodes;
  std::vector<TokenString> strings;
  Token eos = 0;
  std::size_t vocab_size = 0;

  [[nodiscard]] std::optional<std::size_t> find(std::span<const Token> prefix) const {
    std::size_t node = 0;
    for (const Token t : prefix) {
      const auto it = nodes[node].children.find(t);
      if (it == nodes[node].children.end()) {
        return std::nullopt;
      }
      node = it->second;
    }
    return node;
  }
};

TrieLanguage::TrieLanguage(const std::vector<TokenString>& strings, Token eos, std::size_t vocab_size) {
  auto impl = std::make_shared<Impl>();
  impl->eos = eos;
  impl->vocab_size = vocab_size;
  impl->nodes.emplace_back();
  for (const auto& s : strings) {
    std::size_t node = 0;
    for (const Token t : s) {
      if (t >= vocab_size || t == eos) {
        throw ConfigError("trie language: token outside alphabet");
      }
      auto it = impl->nodes[node].children.find(t);
      if (it == impl->nodes[node].children.end()) {
        impl->nodes.emplace_back();
        it = impl->nodes[node].children.emplace(t, impl->nodes.size() - 1).first;
      }
      node = it->second;
    }
    if (!impl->nodes[node].terminal) {
      impl->nodes[node].terminal = true;
      impl->strings.push_back(s);
    }
  }
  impl_ = std::move(impl);
}

TrieLanguage TrieLanguage::parse_lines(std::string_view text, const Vocabulary& vocab, bool keep_empty) {
  std::vector<TokenString> strings;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (!line.empty() || (keep_empty && end < text.size())) {
      strings.push_back(vocab.tokenize(line));
    }
    pos = end + 1;
  }
  return TrieLanguage{strings, vocab.eos(), vocab.size()};
}

TrieLanguage TrieLanguage::load(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in{path};
  if (!in) {
    throw ConfigError("cannot open language file " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_lines(buffer.str(), vocab);
}

TrieLanguage TrieLanguage::parse_literal(std::string_view literal, const Vocabulary& vocab) {
  if (literal.size() < 2 || literal.front() != '{' || literal.back() != '}') {
    throw ConfigError("language literal must look like {s1,s2,...}");
  }
  literal = literal.substr(1, literal.size() - 2);
  std::vector<TokenString> strings;
  std::size_t pos = 0;
  while (pos <= literal.size()) {
    auto end = literal.find(',', pos);
    if (end == std::string_view::npos) {
      end = literal.size();
    }
    auto item = literal.substr(pos, end - pos);
    while (!item.empty() && item.front() == ' ') {
      item.remove_prefix(1);
    }
    while (!item.empty() && item.back() == ' ') {
      item.remove_suffix(1);
    }
    strings.push_back(vocab.tokenize(item));
    pos = end + 1;
  }
  return TrieLanguage{strings, vocab.eos(), vocab.size()};
}

bool TrieLanguage::contains(std::span<const Token> s) const {
  const auto node = impl_->find(s);
  return node && impl_->nodes[*node].terminal;
}

bool TrieLanguage::is_prefix(std::span<const Token> prefix) const { return impl_->find(prefix).has_value(); }

const std::vector<TokenString>& TrieLanguage::strings() const noexcept { return impl_->strings; }
Token TrieLanguage::eos() const noexcept { return impl_->eos; }
std::size_t TrieLanguage::vocab_size() const noexcept { return impl_->vocab_size; }

IncrementalConstraint TrieLanguage::constraint() const {
  return IncrementalConstraint::from_binder([impl = impl_](std::span<const Token> prefix) -> TokenConstraint::Predicate {
    const auto node = impl->find(prefix);
    if (!node) {
      return [](Token) { return false; };
    }
    const auto* n = &impl->nodes[*node];
    const Token eos = impl->eos;
    return [impl, n, eos](Token t) { return t == eos ? n->terminal : n->children.contains(t); };
  });
}

TokenConstraint trie_constraint(const TrieLanguage& lang, std::span<const Token> prefix) {
  return lang.constraint().at(prefix);
}

DfaPattern::DfaPattern(std::size_t num_states, int start, std::vector<std::vector<int>> transitions,
                       std::vector<bool> accepting, Token eos)
    : start_{start}, transitions_{std::move(transitions)}, accepting_{std::move(accepting)}, eos_{eos} {
  if (num_states == 0 || transitions_.size() != num_states || accepting_.size() != num_states) {
    throw ConfigError("dfa: state tables do not match the state count");
  }
  if (start_ < 0 || static_cast<std::size_t>(start_) >= num_states) {
    throw ConfigError("dfa: start state out of range");
  }
  for (const auto& row : transitions_) {
    for (const int next : row) {
      if (next != kNoTransition && (next < 0 || static_cast<std::size_t>(next) >= num_states)) {
        throw ConfigError("dfa: transition target out of range");
      }
    }
  }
  // Live states: those that can reach an accepting state (backward fixpoint).
  live_ = accepting_;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t s = 0; s < num_states; ++s) {
      if (live_[s]) {
        continue;
      }
      for (const int next : transitions_[s]) {
        if (next != kNoTransition && live_[static_cast<std::size_t>(next)]) {
          live_[s] = true;
          changed = true;
          break;
        }
      }
    }
  }
}

int DfaPattern::step(int state, Token token) const {
  const auto& row = transitions_.at(static_cast<std::size_t>(state));
  return token < row.size() ? row[token] : kNoTransition;
}

std::optional<int> DfaPattern::run(std::span<const Token> prefix) const {
  int state = start_;
  if (!live_[static_cast<std::size_t>(state)]) {
    return std::nullopt;
  }
  for (const Token t : prefix) {
    state = step(state, t);
    if (state == kNoTransition || !live_[static_cast<std::size_t>(state)]) {
      return std::nullopt;
    }
  }
  return state;
}

DfaPattern DfaPattern::parse(std::string_view json_text, const Vocabulary& vocab) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
    const auto num_states = doc.at("states").get<std::size_t>();
    const int start = doc.value("start", 0);
    std::vector<std::vector<int>> transitions(num_states, std::vector<int>(vocab.alphabet_size(), kNoTransition));
    if (doc.contains("alphabet")) {
      for (const auto& sym : doc.at("alphabet")) {
        if (!vocab.find(sym.get<std::string>())) {
          throw ConfigError("dfa: alphabet symbol '" + sym.get<std::string>() + "' not in the model vocabulary");
        }
      }
    }
    for (const auto& edge : doc.at("transitions")) {
      const auto from = edge.at(0).get<std::size_t>();
      const auto symbol = edge.at(1).get<std::string>();
      const int to = edge.at(2).get<int>();
      const auto token = vocab.find(symbol);
      if (!token || *token == vocab.eos()) {
        throw ConfigError("dfa: unknown transition symbol '" + symbol + "'");
      }
      if (from >= num_states) {
        throw ConfigError("dfa: transition source out of range");
      }
      transitions[from][*token] = to;
    }
    std::vector<bool> accepting(num_states, false);
    for (const auto& s : doc.at("accepting")) {
      const auto idx = s.get<std::size_t>();
      if (idx >= num_states) {
        throw ConfigError("dfa: accepting state out of range");
      }
      accepting[idx] = true;
    }
    return DfaPattern{num_states, start, std::move(transitions), std::move(accepting), vocab.eos()};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string{"dfa json: "} + e.what());
  }
}

DfaPattern DfaPattern::load(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in{path};
  if (!in) {
    throw ConfigError("cannot open pattern file " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), vocab);
}

IncrementalConstraint DfaPattern::constraint() const {
  auto self = std::make_shared<const DfaPattern>(*this);
  return IncrementalConstraint::from_binder([self](std::span<const Token> prefix) -> TokenConstraint::Predicate {
    const auto state = self->run(prefix);
    if (!state) {
      return [](Token) { return false; };
    }
    return [self, s = *state](Token t) {
      if (t == self->eos()) {
        return self->is_accepting(s);
      }
      const int next = self->step(s, t);
      return next != kNoTransition && self->is_live(next);
    };
  });
}

TokenConstraint dfa_constraint(const DfaPattern& pattern, std::span<const Token> prefix) {
  return pattern.constraint().at(prefix);
}

IncrementalConstraint blackbox_constraint(IncrementalConstraint::Predicate fn) {
  return IncrementalConstraint{std::move(fn)};
}

TokenConstraint mask_constraint(std::vector<bool> valid) {
  return TokenConstraint{[mask = std::move(valid)](Token t) { return t < mask.size() && mask[t]; }};
}

}  // namespace awrs
