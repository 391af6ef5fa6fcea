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

#ifndef AWRS_CONSTRAINTS_HPP
#define AWRS_CONSTRAINTS_HPP

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <awrs/categorical.hpp>
#include <awrs/vocabulary.hpp>

/**
 * \file
 * \brief Local constraint functions with evaluation counting.
 *
 * Constraint evaluations are the unit of runtime throughout the library, so
 * every predicate call goes through a shared atomic counter.
 */

namespace awrs {

using EvalCounter = std::atomic<std::uint64_t>;

/// c(x) for one fixed prefix.
class TokenConstraint {
 public:
  using Predicate = std::function<bool(Token)>;

  explicit TokenConstraint(Predicate predicate, std::shared_ptr<EvalCounter> counter = nullptr);

  /// Evaluates the predicate and bumps the counter by exactly one.
  bool operator()(Token token) const {
    counter_->fetch_add(1, std::memory_order_relaxed);
    return predicate_(token);
  }

  [[nodiscard]] std::uint64_t eval_count() const noexcept { return counter_->load(std::memory_order_relaxed); }
  [[nodiscard]] const std::shared_ptr<EvalCounter>& counter() const noexcept { return counter_; }

 private:
  Predicate predicate_;
  std::shared_ptr<EvalCounter> counter_;
};

/// Incremental constraint c(x' | prefix) over a whole generation.
/**
 * `at(prefix)` binds a prefix and returns a TokenConstraint that shares this
 * object's counter, so the total number of evaluations across all prefixes
 * is available from `eval_count()`.
 */
class IncrementalConstraint {
 public:
  using Predicate = std::function<bool(std::span<const Token> prefix, Token token)>;
  using Binder = std::function<TokenConstraint::Predicate(std::span<const Token> prefix)>;

  explicit IncrementalConstraint(Predicate predicate);
  [[nodiscard]] static IncrementalConstraint from_binder(Binder binder);
  [[nodiscard]] static IncrementalConstraint vacuous();

  [[nodiscard]] TokenConstraint at(std::span<const Token> prefix) const;
  bool operator()(std::span<const Token> prefix, Token token) const;

  /// Checks every step of `s` followed by `eos`. Each step counts as an evaluation.
  [[nodiscard]] bool accepts_string(std::span<const Token> s, Token eos) const;

  [[nodiscard]] std::uint64_t eval_count() const noexcept { return counter_->load(std::memory_order_relaxed); }

 private:
  IncrementalConstraint() = default;

  Binder binder_;
  std::shared_ptr<EvalCounter> counter_ = std::make_shared<EvalCounter>(0);
};

/// Finite language stored as a prefix tree.
class TrieLanguage {
 public:
  /// `vocab_size` includes `eos`; string tokens must be < vocab_size and != eos.
  TrieLanguage(const std::vector<TokenString>& strings, Token eos, std::size_t vocab_size);

  /// Newline-delimited UTF-8 file, one string per line, segmented with `vocab`.
  [[nodiscard]] static TrieLanguage load(const std::filesystem::path& path, const Vocabulary& vocab);
  /// Parses lines of text (one string per line; blank lines are the empty string only if `keep_empty`).
  [[nodiscard]] static TrieLanguage parse_lines(std::string_view text, const Vocabulary& vocab, bool keep_empty = false);
  /// Parses a set literal such as "{aa,ba}".
  [[nodiscard]] static TrieLanguage parse_literal(std::string_view literal, const Vocabulary& vocab);

  [[nodiscard]] bool contains(std::span<const Token> s) const;
  /// True iff some stored string starts with `prefix`.
  [[nodiscard]] bool is_prefix(std::span<const Token> prefix) const;
  [[nodiscard]] const std::vector<TokenString>& strings() const noexcept;
  [[nodiscard]] Token eos() const noexcept;
  [[nodiscard]] std::size_t vocab_size() const noexcept;

  [[nodiscard]] IncrementalConstraint constraint() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Local constraint of `lang` after `prefix`; all-false when the prefix is dead.
[[nodiscard]] TokenConstraint trie_constraint(const TrieLanguage& lang, std::span<const Token> prefix);

/// Deterministic automaton over the alphabet with precomputed live states.
class DfaPattern {
 public:
  static constexpr int kNoTransition = -1;

  /// transitions[state][token] gives the next state or kNoTransition.
  DfaPattern(std::size_t num_states, int start, std::vector<std::vector<int>> transitions,
             std::vector<bool> accepting, Token eos);

  /// JSON {"states": n, "start": s?, "alphabet": [...], "transitions": [[from, "sym", to], ...], "accepting": [...]}.
  [[nodiscard]] static DfaPattern parse(std::string_view json_text, const Vocabulary& vocab);
  [[nodiscard]] static DfaPattern load(const std::filesystem::path& path, const Vocabulary& vocab);

  /// State after consuming `prefix`, or nullopt if the run leaves the live set.
  [[nodiscard]] std::optional<int> run(std::span<const Token> prefix) const;
  [[nodiscard]] bool is_live(int state) const { return live_.at(static_cast<std::size_t>(state)); }
  [[nodiscard]] bool is_accepting(int state) const { return accepting_.at(static_cast<std::size_t>(state)); }
  [[nodiscard]] int step(int state, Token token) const;
  [[nodiscard]] std::size_t num_states() const noexcept { return transitions_.size(); }
  [[nodiscard]] Token eos() const noexcept { return eos_; }

  [[nodiscard]] IncrementalConstraint constraint() const;

 private:
  int start_;
  std::vector<std::vector<int>> transitions_;
  std::vector<bool> accepting_;
  std::vector<bool> live_;
  Token eos_;
};

[[nodiscard]] TokenConstraint dfa_constraint(const DfaPattern& pattern, std::span<const Token> prefix);

/// Wraps an arbitrary pure predicate with evaluation counting.
[[nodiscard]] IncrementalConstraint blackbox_constraint(IncrementalConstraint::Predicate fn);

/// Local constraint from a per-token mask.
[[nodiscard]] TokenConstraint mask_constraint(std::vector<bool> valid);

}  // namespace awrs

#endif
