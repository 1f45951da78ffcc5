#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace normy::text {

/// A word as it appears in the source text. `norm` is the lowercased form
/// used everywhere downstream; `raw` keeps the original casing for features
/// that need it (keyphrase casing, antecedent detection).
struct Word {
    std::string raw;
    std::string norm;
    std::size_t offset = 0;    // byte offset of `raw` in the source text
    std::size_t sentence = 0;  // 0-based sentence index
    bool capitalized = false;  // first character is an ASCII uppercase letter
    bool acronym = false;      // >= 2 letters, all uppercase
};

/// Splits on non-alphanumeric code point boundaries. Non-ASCII code points
/// count as word characters unless they fall in a punctuation/symbol block.
/// Sentence boundaries are [.?!] followed by whitespace.
std::vector<Word> split_words(std::string_view text);

/// Full token stream: every word, lowercased, stopwords kept.
std::vector<std::string> tokenize(std::string_view text);

/// Index stream: tokenize() minus stopwords.
std::vector<std::string> index_terms(std::string_view text);

bool is_stopword(std::string_view term);

/// Stopword-filtered copy of an already tokenized stream.
std::vector<std::string> content_terms(const std::vector<std::string>& tokens);

/// Order-preserving de-duplication.
std::vector<std::string> distinct(const std::vector<std::string>& terms);

std::string join(const std::vector<std::string>& parts, std::string_view sep = " ");

std::string to_lower_ascii(std::string_view s);

}  // namespace normy::text
