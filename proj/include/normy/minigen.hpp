#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "normy/dataset.hpp"
#include "normy/history.hpp"

namespace normy::minigen {

/// Synthetic biography collection with topic-shifting conversations.
///
/// Every entity has one passage per section (early life, education, ...),
/// each stating three facts, plus narrative chunks that mention the same cue
/// words in passing. The defaults yield 250 * (8 + 12) = 5,000 passages.
/// A conversation asks two or three questions about one section before
/// moving to another, mostly with pronouns and some vague follow-ups
/// ("what else ..."), and may switch to a second entity named in the
/// first one's passages.
struct MiniConfig {
    std::uint64_t seed = 20240611;
    std::size_t entities = 250;
    std::size_t narrative_chunks = 12;  // fact-free chunks per entity besides its sections
    std::size_t conversations = 50;
    std::size_t min_turns = 6;
    std::size_t max_turns = 9;
    std::size_t min_segment = 2;  // questions asked about a section before moving on (at most 3)
    double follow_up_rate = 0.4;  // later questions of a segment phrased as vague follow-ups
    double shift_rate = 0.6;      // conversation switches entity midway

    void validate() const;
};

inline constexpr std::size_t kSections = 8;

struct MiniDataset {
    std::vector<dataset::Document> documents;
    std::vector<history::Conversation> conversations;
};

/// Deterministic for a given config on every platform.
MiniDataset generate(const MiniConfig& config = {});

}  // namespace normy::minigen
