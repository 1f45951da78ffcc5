#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "normy/corpus_index.hpp"
#include "normy/history.hpp"
#include "normy/metrics.hpp"

namespace normy::dataset {

/// One corpus record: {"id": str, "title": str, "text": str}.
struct Document {
    std::string id;
    std::string title;
    std::string text;
};

std::vector<Document> load_documents(std::istream& in);
std::vector<Document> load_documents_file(const std::string& path);
std::string document_to_json(const Document& doc);

/// Documents as passages, one passage per document.
std::vector<Passage> as_passages(const std::vector<Document>& docs);

/// Splits each document's word stream into consecutive chunks of
/// `chunk_len` words (the last may be shorter). Chunk ids are
/// "{doc_id}#{index}"; chunk text is the chunk's words joined by spaces,
/// original casing kept, so tokenize(text) reproduces the chunk.
std::vector<Passage> chunk_documents(const std::vector<Document>& docs, std::size_t chunk_len = 384);

/// True when the answer's token stream occurs contiguously in the passage's.
bool contains_answer(const Passage& passage, const std::string& answer);

/// Gold passage per qid. An explicit gold_passage_id that exists in the
/// index wins. Otherwise the gold answer's passage_id is resolved: as an
/// indexed id directly, or as a document id whose earliest chunk
/// ("{id}#{i}") containing the answer is gold. Turns with neither are
/// skipped. Throws std::runtime_error when a gold answer does not occur in
/// its resolved passage.
metrics::GoldPassages resolve_gold(const InvertedIndex& index, const std::vector<history::Conversation>& convs);

}  // namespace normy::dataset
