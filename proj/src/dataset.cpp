#include "normy/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <stdexcept>

#include "json.hpp"
#include "normy/text.hpp"

namespace normy::dataset {

std::vector<Document> load_documents(std::istream& in) {
    std::vector<Document> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            out.push_back({j.at("id").get<std::string>(), j.value("title", std::string{}),
                           j.at("text").get<std::string>()});
        } catch (const std::exception& e) {
            throw std::runtime_error("corpus line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Document> load_documents_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_documents(in);
}

std::string document_to_json(const Document& doc) {
    return nlohmann::json{{"id", doc.id}, {"title", doc.title}, {"text", doc.text}}.dump();
}

std::vector<Passage> as_passages(const std::vector<Document>& docs) {
    std::vector<Passage> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(Passage::make(d.id, d.title, d.text));
    return out;
}

std::vector<Passage> chunk_documents(const std::vector<Document>& docs, std::size_t chunk_len) {
    if (chunk_len < 1) throw std::invalid_argument("chunk_len must be >= 1");
    std::vector<Passage> out;
    for (const auto& d : docs) {
        const auto words = text::split_words(d.text);
        for (std::size_t begin = 0, index = 0; begin < words.size(); begin += chunk_len, ++index) {
            const auto end = std::min(words.size(), begin + chunk_len);
            std::string body;
            for (std::size_t i = begin; i < end; ++i) {
                if (i > begin) body += ' ';
                body += words[i].raw;
            }
            out.push_back(Passage::make(d.id + "#" + std::to_string(index), d.title, std::move(body)));
        }
    }
    return out;
}

bool contains_answer(const Passage& passage, const std::string& answer) {
    const auto needle = text::tokenize(answer);
    if (needle.empty()) return false;
    return std::search(passage.tokens.begin(), passage.tokens.end(), needle.begin(), needle.end()) !=
           passage.tokens.end();
}

metrics::GoldPassages resolve_gold(const InvertedIndex& index, const std::vector<history::Conversation>& convs) {
    metrics::GoldPassages gold;
    for (const auto& conv : convs) {
        for (const auto& turn : conv.turns) {
            std::optional<std::string> pid;
            if (turn.gold_passage_id && index.find(*turn.gold_passage_id)) pid = turn.gold_passage_id;
            if (turn.gold_answer) {
                const auto& ans = *turn.gold_answer;
                if (!pid && index.find(ans.passage_id)) pid = ans.passage_id;
                if (!pid) {
                    for (std::size_t i = 0;; ++i) {
                        const auto doc = index.find(ans.passage_id + "#" + std::to_string(i));
                        if (!doc) break;
                        if (contains_answer(index.passage(*doc), ans.text)) {
                            pid = index.passage(*doc).id;
                            break;
                        }
                    }
                }
                if (pid && !contains_answer(index.passage(*index.find(*pid)), ans.text)) {
                    throw std::runtime_error("gold answer for " + turn.qid + " does not occur in passage " + *pid);
                }
            }
            if (pid && !gold.emplace(turn.qid, *pid).second) {
                throw std::runtime_error("qid " + turn.qid + " is not unique across conversations");
            }
        }
    }
    return gold;
}

}  // namespace normy::dataset
