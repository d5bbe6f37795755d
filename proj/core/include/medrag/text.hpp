#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace medrag {

// Counts tokens of a piece of text. The shipped default counts
// whitespace-delimited tokens ("words"); embedders may substitute a
// subword counter.
using TokenCounter = std::function<int(std::string_view)>;

// Whitespace-delimited tokens, text otherwise untouched.
std::vector<std::string> whitespace_tokens(std::string_view text);

// Whitespace-delimited tokens, lowercased (ASCII).
std::vector<std::string> lowercase_tokens(std::string_view text);

// Tokens for query/passage matching: lowercased, punctuation stripped
// except hyphens joining two alphanumeric characters. Tokens that become
// empty are dropped.
std::vector<std::string> word_tokens(std::string_view text);

int count_whitespace_tokens(std::string_view text);

TokenCounter default_token_counter();

std::string to_lower(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Fixed English stopword list (~180 words), frozen for reproducibility.
const std::unordered_set<std::string>& english_stopwords();

// High-frequency general-clinical vocabulary; query terms found here are
// considered less specific when a ladder level has to drop a term.
const std::unordered_set<std::string>& general_medical_words();

// Tokens (including the trailing period, lowercased) that never end a
// sentence: "e.g.", "fig.", "al.", single initials, ...
const std::unordered_set<std::string>& sentence_abbreviations();

}  // namespace medrag
