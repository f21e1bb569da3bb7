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

#ifndef MTLIB_TEXT_HPP
#define MTLIB_TEXT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mt {

// Canonical form used for fact identity: trim outer whitespace and collapse
// internal runs to a single space. Case is preserved (it can be semantic).
std::string normalize_text(std::string_view text);

// Retrieval tokenization: lowercase, split on non-alphanumeric bytes.
// Bytes >= 0x80 are treated as letters so UTF-8 sequences stay intact.
std::vector<std::string> tokenize(std::string_view text);

// Character n-grams of the raw byte string, used by the mock embedder.
std::vector<std::string> char_ngrams(std::string_view text, std::size_t n);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0);

// 32 hex chars over the raw bytes, no normalization. Used to fingerprint
// artifact files in run manifests.
std::string digest128(std::string_view bytes);

// Content-addressed identity: 32 hex chars derived from the normalized text.
// Re-extraction of the same sentence therefore mints the same id.
std::string content_id(std::string_view text);

// Id minted for a retained sub-hypothesis when it is injected into the fact
// pool as a pseudo-fact. The prefix marks the element as expandable.
inline constexpr std::string_view kSubHypothesisIdPrefix = "sub-";
std::string sub_hypothesis_id(std::string_view text);
bool is_sub_hypothesis_id(std::string_view id);

}  // namespace mt

#endif  // MTLIB_TEXT_HPP
