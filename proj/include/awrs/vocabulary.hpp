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

#ifndef AWRS_VOCABULARY_HPP
#define AWRS_VOCABULARY_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <awrs/categorical.hpp>

namespace awrs {

/// Symbol table: alphabet symbols get ids 0..A-1, end-of-string gets id A.
class Vocabulary {
 public:
  explicit Vocabulary(std::vector<std::string> symbols, std::string eos_name = "<eos>");

  [[nodiscard]] std::size_t size() const noexcept { return symbols_.size() + 1; }
  [[nodiscard]] std::size_t alphabet_size() const noexcept { return symbols_.size(); }
  [[nodiscard]] Token eos() const noexcept { return static_cast<Token>(symbols_.size()); }
  [[nodiscard]] const std::vector<std::string>& symbols() const noexcept { return symbols_; }
  [[nodiscard]] const std::string& eos_name() const noexcept { return eos_name_; }

  [[nodiscard]] std::optional<Token> find(std::string_view symbol) const;
  [[nodiscard]] const std::string& name(Token token) const;

  /// Greedy longest-match segmentation of `text` into alphabet symbols.
  /// Throws ConfigError on text that cannot be segmented.
  [[nodiscard]] TokenString tokenize(std::string_view text) const;
  /// Concatenates symbol names; eos is dropped.
  [[nodiscard]] std::string detokenize(std::span<const Token> tokens) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) noexcept {
    return a.symbols_ == b.symbols_ && a.eos_name_ == b.eos_name_;
  }

 private:
  std::vector<std::string> symbols_;
  std::string eos_name_;
  std::unordered_map<std::string, Token> index_;
  std::size_t longest_ = 0;
};

}  // namespace awrs

#endif
