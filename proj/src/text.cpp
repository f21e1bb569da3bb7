// Copyright 2026 The Microtheory Authors
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

#include "mtlib/text.hpp"

#include <cctype>

namespace mt {

namespace {

inline bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline bool is_word_byte(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}

}  // namespace

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (is_space_byte(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(c));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> char_ngrams(std::string_view text, std::size_t n) {
  std::vector<std::string> grams;
  if (n == 0 || text.size() < n) {
    if (!text.empty()) grams.emplace_back(text);
    return grams;
  }
  grams.reserve(text.size() - n + 1);
  for (std::size_t i = 0; i + n <= text.size(); ++i) {
    grams.emplace_back(text.substr(i, n));
  }
  return grams;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t hash = 14695981039346656037ULL ^ seed;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

namespace {

std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace

std::string digest128(std::string_view bytes) {
  // Two independently seeded 64-bit passes; 128 bits is comfortably
  // collision-free at pool scale.
  return to_hex(fnv1a64(bytes, 0)) +
         to_hex(fnv1a64(bytes, 0x9e3779b97f4a7c15ULL));
}

std::string content_id(std::string_view text) {
  return digest128(normalize_text(text));
}

std::string sub_hypothesis_id(std::string_view text) {
  return std::string(kSubHypothesisIdPrefix) + content_id(text);
}

bool is_sub_hypothesis_id(std::string_view id) {
  return id.substr(0, kSubHypothesisIdPrefix.size()) == kSubHypothesisIdPrefix;
}

}  // namespace mt
