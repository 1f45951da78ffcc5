#include "normy/text.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

namespace normy::text {

namespace {

// Standard English function words plus question words, auxiliaries and
// pronouns, which carry no retrieval signal in conversational questions.
constexpr std::array kStopwords = {
    "a",    "about", "an",    "and",   "are",  "as",    "at",    "be",   "but",  "by",
    "can",  "did",   "do",    "does",  "for",  "from",  "had",   "has",  "have", "he",
    "her",  "hers",  "him",   "his",   "how",  "i",     "if",    "in",   "into", "is",
    "it",   "its",   "no",    "not",   "of",   "on",    "one",   "or",   "she",  "such",
    "that", "the",   "their", "them",  "then", "there", "these", "they", "this", "those",
    "to",   "was",   "we",    "were",  "what", "when",  "where", "which", "who", "whom",
    "why",  "will",  "with",  "you",
};

const std::unordered_set<std::string_view>& stopword_set() {
    static const std::unordered_set<std::string_view> set(kStopwords.begin(), kStopwords.end());
    return set;
}

bool is_ascii_alnum(char32_t cp) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
}

bool is_word_code_point(char32_t cp) {
    if (cp < 0x80) return is_ascii_alnum(cp);
    if (cp <= 0xBF) return false;               // C1 controls, Latin-1 punctuation
    if (cp == 0xD7 || cp == 0xF7) return false;  // multiplication/division signs
    if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // general punctuation .. misc symbols
    if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
    if (cp >= 0xFE10 && cp <= 0xFE6F) return false;  // vertical/small forms
    if (cp >= 0xFF00 && cp <= 0xFF20) return false;  // fullwidth ASCII punctuation
    if (cp == 0xFFFD) return false;
    return true;
}

// Decodes one UTF-8 sequence starting at text[i]. Malformed input yields
// U+FFFD and advances one byte.
char32_t decode(std::string_view text, std::size_t i, std::size_t& len) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    auto cont = [&](std::size_t k) -> int {
        if (i + k >= text.size()) return -1;
        const auto b = static_cast<unsigned char>(text[i + k]);
        return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
    };
    len = 1;
    if (b0 < 0x80) return b0;
    int need = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        need = 1;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        need = 2;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        need = 3;
        cp = b0 & 0x07;
    } else {
        return 0xFFFD;
    }
    for (int k = 1; k <= need; ++k) {
        const int c = cont(static_cast<std::size_t>(k));
        if (c < 0) return 0xFFFD;
        cp = (cp << 6) | static_cast<char32_t>(c);
    }
    len = static_cast<std::size_t>(need) + 1;
    return cp;
}

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

Word make_word(std::string_view text, std::size_t begin, std::size_t end, std::size_t sentence) {
    Word w;
    w.raw = std::string(text.substr(begin, end - begin));
    w.norm = to_lower_ascii(w.raw);
    w.offset = begin;
    w.sentence = sentence;
    w.capitalized = w.raw[0] >= 'A' && w.raw[0] <= 'Z';
    int letters = 0;
    bool any_lower = false;
    for (char c : w.raw) {
        if (c >= 'A' && c <= 'Z') ++letters;
        if (c >= 'a' && c <= 'z') any_lower = true;
    }
    w.acronym = letters >= 2 && !any_lower;
    return w;
}

}  // namespace

std::vector<Word> split_words(std::string_view text) {
    std::vector<Word> words;
    std::size_t sentence = 0;
    std::size_t i = 0;
    std::size_t word_begin = std::string_view::npos;
    bool sentence_pending = false;  // saw [.?!], waiting for whitespace
    while (i < text.size()) {
        std::size_t len = 1;
        const char32_t cp = decode(text, i, len);
        if (is_word_code_point(cp)) {
            if (word_begin == std::string_view::npos) word_begin = i;
            sentence_pending = false;
        } else {
            if (word_begin != std::string_view::npos) {
                words.push_back(make_word(text, word_begin, i, sentence));
                word_begin = std::string_view::npos;
            }
            if (cp == '.' || cp == '?' || cp == '!') {
                sentence_pending = true;
            } else if (cp < 0x80 && is_space(static_cast<char>(cp))) {
                if (sentence_pending && !words.empty() && words.back().sentence == sentence) {
                    ++sentence;
                }
                sentence_pending = false;
            } else {
                sentence_pending = false;
            }
        }
        i += len;
    }
    if (word_begin != std::string_view::npos) {
        words.push_back(make_word(text, word_begin, text.size(), sentence));
    }
    return words;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for (auto& w : split_words(text)) out.push_back(std::move(w.norm));
    return out;
}

std::vector<std::string> index_terms(std::string_view text) {
    return content_terms(tokenize(text));
}

bool is_stopword(std::string_view term) {
    return stopword_set().contains(term);
}

std::vector<std::string> content_terms(const std::vector<std::string>& tokens) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (!is_stopword(t)) out.push_back(t);
    }
    return out;
}

std::vector<std::string> distinct(const std::vector<std::string>& terms) {
    std::vector<std::string> out;
    std::unordered_set<std::string_view> seen;
    for (const auto& t : terms) {
        if (seen.insert(t).second) out.push_back(t);
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](char c) {
        return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    });
    return out;
}

}  // namespace normy::text
