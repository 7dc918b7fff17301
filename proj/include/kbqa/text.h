// Copyright 2026 The KBQA Authors.
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

#ifndef KBQA_TEXT_H_
#define KBQA_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace kbqa {

// Splits text into lowercase word tokens. Token characters are ASCII letters
// and digits, '_' and any non-ASCII byte; everything else separates tokens
// and is dropped. The same normalization is applied to questions and entity
// names so that string matching is consistent.
std::vector<std::string> Tokenize(std::string_view text);

// Splits a line on a single-character delimiter, keeping empty fields.
std::vector<std::string_view> SplitFields(std::string_view line, char delim);

// Joins tokens with single spaces.
std::string JoinWords(const std::vector<std::string> &words);

}  // namespace kbqa

#endif  // KBQA_TEXT_H_
