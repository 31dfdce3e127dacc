#pragma once

// Built-in coarse POS lexicon. Used for offline tagging and by the mock
// backend's event-count heuristic. Deliberately small: it only has to answer
// "does this caption contain a noun / verb / adjective" for common captions.

#include "concap/text.hpp"

#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace concap {

enum class PosTag { NOUN, VERB, ADJ };
using PosTags = std::set<PosTag>;

inline std::string_view to_string(PosTag t) {
    switch (t) {
        case PosTag::NOUN: return "NOUN";
        case PosTag::VERB: return "VERB";
        case PosTag::ADJ: return "ADJ";
    }
    return "";
}

namespace lexicon {

inline const std::unordered_set<std::string_view>& nouns() {
    static const std::unordered_set<std::string_view> s = {
        "man", "woman", "men", "women", "person", "people", "boy", "girl", "child", "children", "kid", "baby",
        "dog", "cat", "horse", "bird", "fish", "ostrich", "monster", "robot", "car", "bicycle", "bike", "bus",
        "truck", "train", "boat", "plane", "ball", "phone", "smartphone", "piano", "guitar", "cello", "drum",
        "song", "music", "table", "room", "kitchen", "street", "road", "hill", "house", "door", "doorknob",
        "doorway", "window", "water", "food", "cup", "bowl", "shrimp", "broth", "stage", "camera", "video",
        "game", "face", "book", "park", "sculpture", "surfboard", "frisbee", "bottle", "toy", "hand", "foot",
        "feet", "shirt", "hat", "tree", "field", "beach", "wall", "floor", "chair", "bed", "computer", "screen",
        "group", "crowd", "friend", "team", "player", "mattress", "trampoline", "icecream", "cream", "finger",
        "toe", "button", "skate", "wheel", "hall", "cartoon", "slingshot", "surgeon", "reaction", "competitor",
        "mark", "piece", "parasol", "fireworks", "object", "club", "shoulder", "attention", "sticks", "string",
        "instrument", "handle", "watch", "cushion", "body", "tail", "lady", "stripes", "box", "paper", "pen",
        "knife", "plate", "bread", "egg", "pan", "sink", "snow", "grass", "sky", "sun", "rain", "river", "sea",
        "pool", "mountain", "city", "building", "store", "shop", "market", "office", "school", "class",
        "teacher", "student", "doctor", "chef", "singer", "dancer", "audience", "news", "show", "movie",
        "scene", "picture", "image", "light", "fire", "rope", "bag", "box", "key", "lock", "glass", "coffee",
        "tea", "cake", "pizza", "apple", "banana", "orange", "ice", "hair", "head", "arm", "leg", "eye", "mouth",
    };
    return s;
}

inline const std::unordered_set<std::string_view>& verbs() {
    static const std::unordered_set<std::string_view> s = {
        "run", "walk", "eat", "drink", "play", "sing", "dance", "talk", "drive", "ride", "jump", "throw",
        "catch", "take", "hold", "move", "cook", "cut", "open", "close", "sit", "stand", "climb", "swim",
        "read", "write", "look", "push", "pull", "pick", "put", "drop", "grab", "laugh", "smile", "cry",
        "sneeze", "fall", "fly", "kick", "hit", "roll", "pour", "wash", "clean", "paint", "draw", "perform",
        "enter", "leave", "repair", "yell", "speak", "point", "launch", "flip", "toss", "release", "carry",
        "become", "showcase", "tap", "shake", "smell", "wag", "touch", "strum", "pat", "sell", "dismount",
        "give", "go", "come", "start", "begin", "stop", "turn", "spin", "poke", "place", "slide", "mix",
        "stir", "chop", "slice", "fry", "bake", "build", "fix", "explain", "demonstrate", "travel", "test",
        "lift", "shoot", "score", "skate", "surf", "ski", "dive", "wave", "hug", "kiss", "fight", "chase",
        "feed", "brush", "comb", "apply", "wear", "sleep", "wake", "watch", "listen", "type", "answer",
    };
    return s;
}

inline const std::unordered_set<std::string_view>& adjectives() {
    static const std::unordered_set<std::string_view> s = {
        "red", "blue", "green", "yellow", "black", "white", "grey", "gray", "brown", "pink", "purple",
        "big", "small", "large", "tiny", "giant", "little", "tall", "short", "long", "young", "old", "happy",
        "sad", "serious", "new", "beautiful", "wooden", "shiny", "dark", "bright", "hot", "cold", "fast",
        "slow", "funny", "angry", "empty", "full", "heavy", "light", "animated", "different", "aggressive",
        "orange", "pretty", "cute", "ugly", "loud", "quiet", "wet", "dry", "clean", "dirty", "round",
    };
    return s;
}

// Candidate base forms for an inflected word (itself first).
inline std::vector<std::string> stems(const std::string& w) {
    std::vector<std::string> out{w};
    auto ends = [&](std::string_view suf) { return w.size() > suf.size() + 1 && w.ends_with(suf); };
    auto add_base = [&](std::string base) {
        out.push_back(base);
        out.push_back(base + "e");
        if (base.size() >= 2 && base[base.size() - 1] == base[base.size() - 2]) out.push_back(base.substr(0, base.size() - 1));
    };
    if (ends("ing")) add_base(w.substr(0, w.size() - 3));
    if (ends("ed")) add_base(w.substr(0, w.size() - 2));
    if (ends("ies")) out.push_back(w.substr(0, w.size() - 3) + "y");
    if (ends("es")) out.push_back(w.substr(0, w.size() - 2));
    if (ends("s")) out.push_back(w.substr(0, w.size() - 1));
    return out;
}

template <typename Set>
bool matches(const Set& set, const std::string& word) {
    for (const auto& s : stems(word))
        if (set.contains(s)) return true;
    return false;
}

inline bool is_verb(const std::string& w) { return matches(verbs(), w); }

inline PosTags tag(std::string_view text) {
    PosTags tags;
    for (const auto& w : word_tokens(text)) {
        if (matches(nouns(), w)) tags.insert(PosTag::NOUN);
        if (matches(verbs(), w)) tags.insert(PosTag::VERB);
        if (adjectives().contains(w)) tags.insert(PosTag::ADJ);
    }
    return tags;
}

// Two or more verb hits, or an explicit temporal connective, means the
// caption describes several events.
inline bool describes_multiple_events(std::string_view text) {
    auto words = word_tokens(text);
    std::size_t verb_hits = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto& w = words[i];
        if (w == "before" || w == "after") return true;
        if (w == "and" && i + 1 < words.size() && words[i + 1] == "then") return true;
        if (is_verb(w)) ++verb_hits;
    }
    return verb_hits >= 2;
}

}  // namespace lexicon
}  // namespace concap
