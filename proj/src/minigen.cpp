#include "normy/minigen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>

#include "normy/text.hpp"

namespace normy::minigen {

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
    std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
    bool chance(double p) { return static_cast<double>(gen_() >> 11) * 0x1.0p-53 < p; }
    template <class T>
    const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }

private:
    std::mt19937_64 gen_;
};

const std::vector<std::string> kReserved = {
    "born", "parents", "university", "attend", "attended", "studied", "first", "job", "company", "employed",
    "married", "children", "award", "receive", "ceremony", "place", "retire", "die", "title", "book",
    "influenced", "fun", "instrument", "play", "else", "happened", "during", "time", "anything", "interesting",
    "tell", "more", "other", "things", "notable", "worth", "mentioning", "medal", "years", "life",
};

// Words used by vague follow-up questions; they also appear as ordinary
// prose throughout the collection.
const std::vector<std::string> kChatter = {"else", "happened", "during", "time", "anything", "interesting",
                                           "tell", "more", "other", "things", "notable", "worth", "mentioning"};

const std::vector<std::string> kGlue = {"the", "of", "and", "in", "was", "to", "with", "for",
                                        "on", "at", "by", "as", "a", "from", "that", "it"};

const std::vector<std::string> kCounts = {"two", "three", "four", "five", "six", "seven", "eight", "nine"};

class WordMaker {
public:
    explicit WordMaker(Rng& rng) : rng_(rng) {
        for (const auto& w : kReserved) used_.insert(w);
        for (const auto& w : kChatter) used_.insert(w);
    }

    std::string make(std::size_t syllables, bool capital) {
        static constexpr std::string_view kCons = "bdfgklmnprstvz";
        static constexpr std::string_view kVow = "aeiou";
        for (;;) {
            std::string w;
            for (std::size_t i = 0; i < syllables; ++i) {
                w += kCons[rng_.below(kCons.size())];
                w += kVow[rng_.below(kVow.size())];
                if (i + 1 == syllables && rng_.chance(0.4)) w += kCons[rng_.below(kCons.size())];
            }
            if (text::is_stopword(w) || !used_.insert(w).second) continue;
            if (capital) w[0] = static_cast<char>(w[0] - 'a' + 'A');
            return w;
        }
    }

    std::vector<std::string> many(std::size_t n, std::size_t syllables, bool capital) {
        std::vector<std::string> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(make(syllables, capital));
        return out;
    }

private:
    Rng& rng_;
    std::set<std::string> used_;
};

struct Vocab {
    std::vector<std::string> firsts, lasts, places, orgs, fields, professions, hobbies, instruments, titles, filler;
};

struct Entity {
    std::string first, last;
    bool female = false;
    std::vector<std::string> theme;
    std::string name() const { return first + " " + last; }
    std::string subj() const { return female ? "she" : "he"; }
    std::string obj() const { return female ? "her" : "him"; }
    std::string poss() const { return female ? "her" : "his"; }
};

constexpr std::size_t kFactsPerSection = 3;

struct Fact {
    std::string sentence;
    std::string answer;
    std::string question_pronoun;
    std::string question_named;
};

struct Section {
    std::array<Fact, kFactsPerSection> facts;
    std::string text;
    std::string id;
};

std::string cap(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

std::string year(Rng& rng) { return std::to_string(rng.between(1801, 1999)); }

// Zipf-like draw: rank r has weight proportional to 1 / (r + 1).
std::size_t zipf(Rng& rng, std::size_t n) {
    const double h = std::log(static_cast<double>(n) + 1.0);
    const double u = static_cast<double>(rng.below(1u << 30)) / static_cast<double>(1u << 30);
    const auto r = static_cast<std::size_t>(std::exp(u * h)) - 1;
    return std::min(r, n - 1);
}

const std::array<std::string, kSections> kSectionTitles = {"early life", "education", "career", "family",
                                                           "awards",     "later years", "works", "hobbies"};

// Picks one of two phrasings: the answer after the cue words or before them.
std::string either(Rng& rng, std::string answer_after, std::string answer_before) {
    return rng.chance(0.5) ? std::move(answer_after) : std::move(answer_before);
}

std::array<Fact, kFactsPerSection> make_facts(std::size_t section, const Entity& e, const Entity& other,
                                              const Vocab& v, Rng& rng) {
    const auto& L = e.last;
    const auto N = e.name();
    const auto S = e.subj();
    switch (section) {
        case 0: {
            const auto place = rng.pick(v.places);
            const auto pl = rng.pick(v.lasts);
            const auto father = rng.pick(v.firsts);
            const auto mother = rng.pick(v.firsts);
            const auto parents = father + " " + pl + " and " + mother + " " + pl;
            const auto count = rng.pick(kCounts);
            const auto born = either(rng, N + " was born in " + place + " .", "In " + place + " " + N + " was born .");
            const auto par = either(rng, "The parents of " + L + " were " + parents + " .",
                                    parents + " were the parents of " + L + " .");
            const auto sib = either(rng, L + " grew up with " + count + " siblings .",
                                    "There were " + count + " siblings in the household of " + L + " .");
            return {{{born, place, "Where was " + S + " born?", "Where was " + N + " born?"},
                     {par, parents, "Who were " + e.poss() + " parents?", "Who were the parents of " + N + "?"},
                     {sib, count, "How many siblings did " + S + " have?", "How many siblings did " + N + " have?"}}};
        }
        case 1: {
            const auto uni = rng.pick(v.orgs) + " University";
            const auto field = rng.pick(v.fields);
            const auto y = year(rng);
            const auto att = either(rng, L + " went on to attend " + uni + " .",
                                    uni + " was the university " + L + " would attend .");
            const auto stud = either(rng, "There " + S + " studied " + field + " for years .",
                                     "The subject was " + field + " , which " + S + " studied there .");
            const auto grad = either(rng, L + " would graduate in " + y + " .", "In " + y + " " + L + " would graduate .");
            return {{{att, uni, "Which university did " + S + " attend?", "Which university did " + N + " attend?"},
                     {stud, field, "What had " + S + " studied there?", "What had " + N + " studied?"},
                     {grad, y, "When did " + S + " graduate?", "When did " + N + " graduate?"}}};
        }
        case 2: {
            const auto prof = rng.pick(v.professions);
            const auto org = rng.pick(v.orgs);
            const auto prof2 = rng.pick(v.professions);
            const auto job = either(rng, cap(e.poss()) + " first job was as a " + prof + " .",
                                    "As a " + prof + " " + L + " found a first job .");
            const auto emp = either(rng, "Later the " + org + " company employed " + L + " .",
                                    org + " was the company that employed " + L + " .");
            const auto prom = either(rng, "Eventually " + L + " was promoted to " + prof2 + " .",
                                     "The rank of " + prof2 + " came when " + L + " was promoted .");
            return {{{job, prof, "What was " + e.poss() + " first job?", "What was the first job of " + N + "?"},
                     {emp, org, "Which company employed " + e.obj() + "?", "Which company employed " + N + "?"},
                     {prom, prof2, "What was " + S + " promoted to?", "What was " + N + " promoted to?"}}};
        }
        case 3: {
            const auto spouse_first = rng.pick(v.firsts);
            const auto spouse = spouse_first + " " + rng.pick(v.lasts);
            const auto count = rng.pick(kCounts);
            const auto place = rng.pick(v.places);
            const auto mar = either(rng, L + " married " + spouse + " .", spouse + " and " + L + " married .");
            const auto kids = either(rng, "Together they raised children , " + count + " in all .",
                                     "They raised " + count + " children together .");
            const auto house = either(rng, "The family house stood near " + place + " .",
                                      "Near " + place + " stood the family house .");
            return {{{mar, spouse, "Who was " + S + " married to?", "Who was " + N + " married to?"},
                     {kids, count, "How many children did " + S + " have?", "How many children did " + N + " have?"},
                     {house, place, "Where was the family house?", "Where was the family house of " + N + "?"}}};
        }
        case 4: {
            const auto medal = rng.pick(v.orgs) + " Medal";
            const auto y = year(rng);
            const auto count = rng.pick(kCounts);
            const auto aw = either(rng, L + " would receive an award , the " + medal + " .",
                                   "The " + medal + " was the award " + L + " would receive .");
            const auto cer = either(rng, "The ceremony took place in " + y + " .",
                                    "In " + y + " the ceremony took place .");
            const auto prize = either(rng, "The prize came with " + count + " thousand dollars .",
                                      count + " thousand dollars came with the prize .");
            return {{{aw, medal, "Which award did " + S + " receive?", "Which award did " + N + " receive?"},
                     {cer, y, "When did the ceremony take place?", "When was the award ceremony for " + N + "?"},
                     {prize, count + " thousand dollars", "How much was the prize?",
                      "How much was the prize for " + N + "?"}}};
        }
        case 5: {
            const auto place = rng.pick(v.places);
            const auto y = year(rng);
            const auto disease = rng.pick(v.fields);
            const auto ret = either(rng, L + " decided to retire to " + place + " .",
                                    place + " is where " + L + " decided to retire .");
            const auto die = either(rng, L + " would die peacefully in " + y + " .",
                                    "In " + y + " " + L + " would die peacefully .");
            const auto ill = either(rng, "A long illness affected " + L + " , namely " + disease + " .",
                                    "A long illness , " + disease + " , affected " + L + " .");
            return {{{ret, place, "Where did " + S + " retire?", "Where did " + N + " retire?"},
                     {die, y, "When did " + S + " die?", "When did " + N + " die?"},
                     {ill, disease, "Which illness affected " + e.obj() + "?", "Which illness affected " + N + "?"}}};
        }
        case 6: {
            const auto title = rng.pick(v.titles) + " " + rng.pick(v.titles);
            const auto press = rng.pick(v.orgs) + " Press";
            const auto tit = either(rng, "The title of the best known book by " + L + " is " + title + " .",
                                    title + " is the title of the best known book by " + L + " .");
            const auto inf = either(rng, "That book influenced " + other.name() + " a great deal .",
                                    other.name() + " was influenced by that book .");
            const auto pub = either(rng, "The book was published by " + press + " .",
                                    press + " published the book .");
            return {{{tit, title, "What was the title of " + e.poss() + " book?",
                      "What was the title of the book by " + N + "?"},
                     {inf, other.name(), "Who was influenced by " + e.poss() + " book?",
                      "Who was influenced by the book of " + N + "?"},
                     {pub, press, "Who published the book?", "Who published the book by " + N + "?"}}};
        }
        default: {
            const auto hobby = rng.pick(v.hobbies);
            const auto inst = rng.pick(v.instruments);
            const auto pet = rng.pick(v.titles);
            const auto fun = either(rng, "For fun " + L + " enjoyed " + hobby + " with friends .",
                                    cap(hobby) + " was what " + L + " did for fun .");
            const auto play = either(rng, cap(S) + " could play the " + inst + " , an instrument loved by many .",
                                     "The " + inst + " was an instrument " + S + " could play .");
            const auto dog = either(rng, L + " kept a dog , and the name of the dog was " + pet + " .",
                                    pet + " was the name of the dog " + L + " kept .");
            return {{{fun, hobby, "What did " + S + " do for fun?", "What did " + N + " do for fun?"},
                     {play, inst, "Which instrument did " + S + " play?", "Which instrument did " + N + " play?"},
                     {dog, pet, "What was the name of " + e.poss() + " dog?", "What was the name of the dog of " + N + "?"}}};
        }
    }
}

std::string filler_sentence(const Entity& e, const std::vector<Entity>& all, const Vocab& v, Rng& rng) {
    std::vector<std::string> words;
    if (rng.chance(0.3)) {
        words.push_back(cap(e.subj()));
    } else if (rng.chance(0.3)) {
        words.push_back(e.last);
    }
    const auto len = rng.between(7, 14);
    for (std::size_t i = 0; i < len; ++i) {
        if (rng.chance(0.3)) {
            words.push_back(rng.pick(kGlue));
        } else if (rng.chance(0.06)) {
            words.push_back(rng.pick(kChatter));
        } else if (rng.chance(0.15)) {
            words.push_back(rng.pick(e.theme));
        } else {
            words.push_back(v.filler[zipf(rng, v.filler.size())]);
        }
    }
    if (rng.chance(0.12)) {
        const auto& o = rng.pick(all);
        words.push_back("with");
        words.push_back(o.name());
    }
    if (words.front()[0] >= 'a' && words.front()[0] <= 'z') words.front() = cap(words.front());
    return text::join(words) + " .";
}

// Cue words of the fact questions, mentioned in passing by narrative chunks.
const std::vector<std::string> kPassingCues = {"born", "parents", "university", "attend", "studied", "first",
                                               "job", "company", "employed", "married", "children", "award",
                                               "receive", "ceremony", "place", "retire", "die", "title",
                                               "book", "influenced", "fun", "instrument", "play"};

std::string narrative_chunk(const Entity& e, const std::vector<Entity>& all, const Vocab& v, Rng& rng) {
    std::vector<std::string> sents;
    sents.push_back(rng.chance(0.5) ? e.name() + " remained active in these years ." : e.last + " kept working .");
    for (auto k = rng.between(4, 8); k > 0; --k) {
        auto s = filler_sentence(e, all, v, rng);
        if (rng.chance(0.35)) {
            s.pop_back();
            s += "and " + rng.pick(kPassingCues) + " .";
        }
        sents.push_back(std::move(s));
    }
    return text::join(sents);
}

}  // namespace

void MiniConfig::validate() const {
    if (entities < 2) throw std::invalid_argument("minigen needs at least 2 entities");
    if (min_turns < 2 || max_turns < min_turns) throw std::invalid_argument("minigen turn range is invalid");
    if (min_segment < 1 || min_segment > 3) throw std::invalid_argument("min_segment must be in [1, 3]");
    if (!(follow_up_rate >= 0.0 && follow_up_rate <= 1.0)) throw std::invalid_argument("follow_up_rate in [0, 1]");
    if (!(shift_rate >= 0.0 && shift_rate <= 1.0)) throw std::invalid_argument("shift_rate in [0, 1]");
}

MiniDataset generate(const MiniConfig& config) {
    config.validate();
    Rng rng(config.seed);
    WordMaker maker(rng);

    Vocab v;
    v.firsts = maker.many(160, 2, true);
    v.lasts = maker.many(config.entities + 200, 3, true);
    v.places = maker.many(250, 3, true);
    v.orgs = maker.many(150, 2, true);
    v.titles = maker.many(200, 2, true);
    v.fields = maker.many(60, 3, false);
    v.professions = maker.many(60, 3, false);
    v.hobbies = maker.many(60, 3, false);
    v.instruments = maker.many(40, 3, false);
    v.filler = maker.many(600, 2, false);

    std::vector<Entity> entities(config.entities);
    for (std::size_t i = 0; i < entities.size(); ++i) {
        auto& e = entities[i];
        e.first = rng.pick(v.firsts);
        e.last = v.lasts[i];
        e.female = rng.chance(0.5);
        for (int t = 0; t < 5; ++t) e.theme.push_back(v.filler[rng.below(v.filler.size())]);
    }

    MiniDataset out;
    std::vector<std::array<Section, kSections>> sections(entities.size());
    std::vector<std::size_t> influenced(entities.size());
    for (std::size_t i = 0; i < entities.size(); ++i) {
        const auto& e = entities[i];
        influenced[i] = (i + 1 + rng.below(entities.size() - 1)) % entities.size();
        for (std::size_t s = 0; s < kSections; ++s) {
            auto& sec = sections[i][s];
            sec.facts = make_facts(s, e, entities[influenced[i]], v, rng);
            char id[32];
            std::snprintf(id, sizeof id, "p%04zu-%zu", i, s);
            sec.id = id;
            std::vector<std::string> sents;
            sents.push_back("This part covers the " + kSectionTitles[s] + " of " + e.name() + " .");
            for (const auto& f : sec.facts) {
                sents.push_back(f.sentence);
                for (auto k = rng.between(1, 2); k > 0; --k) sents.push_back(filler_sentence(e, entities, v, rng));
            }
            sec.text = text::join(sents);
            out.documents.push_back({sec.id, e.name() + " - " + kSectionTitles[s], sec.text});
        }
        for (std::size_t c = 0; c < config.narrative_chunks; ++c) {
            char id[32];
            std::snprintf(id, sizeof id, "p%04zu-n%02zu", i, c);
            out.documents.push_back({id, e.name(), narrative_chunk(e, entities, v, rng)});
        }
    }

    const std::vector<std::string> vague = {"What else happened during that time?", "Anything else interesting?",
                                            "Tell me more about that.", "What other things are notable?",
                                            "Is there anything else worth mentioning?"};

    for (std::size_t c = 0; c < config.conversations; ++c) {
        history::Conversation conv;
        char cid[16];
        std::snprintf(cid, sizeof cid, "c%03zu", c);
        conv.conv_id = cid;
        const auto turns = rng.between(config.min_turns, config.max_turns);
        const bool shifts = rng.chance(config.shift_rate);
        const auto shift_at = shifts ? rng.between(2, turns - 2) : turns;

        std::size_t ent = rng.below(entities.size());
        bool named = false;
        std::vector<std::size_t> order(kSections);
        auto reshuffle = [&] {
            for (std::size_t i = 0; i < kSections; ++i) order[i] = i;
            for (std::size_t i = kSections - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
        };
        reshuffle();
        std::size_t next_section = 0;
        std::size_t section = 0;
        std::vector<std::size_t> remaining;  // unasked facts of the current section
        std::size_t segment_left = 0;

        auto add_turn = [&](const std::string& q, const Section& sec, const Fact& f) {
            history::Turn t;
            t.qid = conv.conv_id + "_q" + std::to_string(conv.turns.size());
            t.question = q;
            t.gold_passage_id = sec.id;
            t.gold_answer = history::GoldAnswer{f.answer, sec.id};
            conv.turns.push_back(std::move(t));
        };

        while (conv.turns.size() < turns) {
            if (conv.turns.size() == shift_at) {
                ent = influenced[ent];
                named = false;
                reshuffle();
                next_section = 0;
                segment_left = 0;
            }
            if (segment_left == 0 || remaining.empty()) {
                section = order[next_section++ % kSections];
                remaining = {0, 1, 2};
                for (std::size_t i = remaining.size() - 1; i > 0; --i) std::swap(remaining[i], remaining[rng.below(i + 1)]);
                segment_left = rng.between(config.min_segment, kFactsPerSection);
                const auto& sec = sections[ent][section];
                const auto& f = sec.facts[remaining.back()];
                add_turn(named ? f.question_pronoun : f.question_named, sec, f);
            } else {
                const auto& sec = sections[ent][section];
                const auto& f = sec.facts[remaining.back()];
                add_turn(rng.chance(config.follow_up_rate) ? rng.pick(vague) : f.question_pronoun, sec, f);
            }
            remaining.pop_back();
            --segment_left;
            named = true;
        }
        out.conversations.push_back(std::move(conv));
    }
    return out;
}

}  // namespace normy::minigen
