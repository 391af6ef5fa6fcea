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

#include <awrs/vocabulary.hpp>

#include <algorithm>

#include <awrs/errors.hpp>

namespace awrs {

Vocabulary::Vocabulary(std::vector<std::string> symbols, std::string eos_name)
    : symbols_{std::move(symbols)}, eos_name_{std::move(eos_name)} {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].empty()) {
      throw ConfigError("vocabulary: empty symbol");
    }
    if (!index_.emplace(symbols_[i], static_cast<Token>(i)).second) {
      throw ConfigError("vocabulary: duplicate symbol '" + symbols_[i] + "'");
    }
    longest_ = std::max(longest_, symbols_[i].size());
  }
  if (index_.contains(eos_name_)) {
    throw ConfigError("vocabulary: eos name collides with a symbol");
  }
}

std::optional<Token> Vocabulary::find(std::string_view symbol) const {
  if (symbol == eos_name_) {
    return eos();
  }
  const auto it = index_.find(std::string{symbol});
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

const std::string& Vocabulary::name(Token token) const {
  if (token == eos()) {
    return eos_name_;
  }
  return symbols_.at(token);
}

TokenString Vocabulary::tokenize(std::string_view text) const {
  TokenString out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    bool matched = false;
    for (std::size_t len = std::min(longest_, text.size() - pos); len > 0; --len) {
      const auto it = index_.find(std::string{text.substr(pos, len)});
      if (it != index_.end()) {
        out.push_back(it->second);
        pos += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw ConfigError("cannot segment '" + std::string{text} + "' at offset " + std::to_string(pos));
    }
  }
  return out;
}

std::string Vocabulary::detokenize(std::span<const Token> tokens) const {
  std::string out;
  for (const Token t : tokens) {
    if (t != eos()) {
      out += symbols_.at(t);
    }
  }
  return out;
}

}  // namespace awrs
