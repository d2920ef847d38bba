#ifndef TCOREF_TERM_HPP
#define TCOREF_TERM_HPP

#include <algorithm>
#include <compare>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "tcoref/porter.hpp"
#include "tcoref/text.hpp"

namespace tcoref {

using Stopwords = std::unordered_set<std::string>;

// Normalized multi-word name. Identity (comparison, hashing) is the token
// sequence only: tokens are case-folded and stemmed, so two spellings of the
// same name compare equal everywhere downstream. `surface` keeps a display
// spelling and `stop` marks which tokens are stopwords; neither participates
// in identity.
struct Term {
    std::vector<std::string> tokens;
    std::vector<bool> stop;
    std::string surface;

    Term() = default;
    Term(std::vector<std::string> toks, std::vector<bool> stops, std::string surf)
        : tokens(std::move(toks)), stop(std::move(stops)), surface(std::move(surf)) {}

    bool empty() const { return tokens.empty(); }
    std::size_t size() const { return tokens.size(); }

    std::string key() const { return join(tokens); }

    // Tokens that carry meaning for containment checks; stopwords inside a
    // multi-word term ("of" in "Union of Myanmar") do not count.
    std::vector<std::string> content_tokens() const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < tokens.size(); ++i)
            if (i >= stop.size() || !stop[i]) out.push_back(tokens[i]);
        if (out.empty()) return tokens;
        return out;
    }

    friend bool operator==(const Term& a, const Term& b) { return a.tokens == b.tokens; }
    friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
        return a.tokens <=> b.tokens;
    }
};

struct TermHash {
    std::size_t operator()(const Term& t) const {
        std::size_t h = 1469598103934665603ull;
        for (const auto& tok : t.tokens) {
            for (char c : tok) {
                h ^= static_cast<unsigned char>(c);
                h *= 1099511628211ull;
            }
            h ^= 0x1f;
            h *= 1099511628211ull;
        }
        return h;
    }
};

inline std::string normalize_token(std::string_view raw) {
    return porter_stem(fold_case(raw));
}

// Builds a Term from a surface spelling: tokenize, case-fold, stem. Terms
// reachable from extraction have one to three tokens; the prolong rule makes
// four-token terms, nothing legal is longer.
inline Term normalize_term(std::string_view surface, const Stopwords& stopwords) {
    std::vector<std::string> raw = word_tokens(surface);
    if (raw.empty() || raw.size() > 4)
        throw std::invalid_argument("malformed term surface: '" + std::string(surface) + "'");
    Term t;
    t.surface = join(raw);
    for (const auto& w : raw) {
        std::string folded = fold_case(w);
        t.stop.push_back(stopwords.count(folded) > 0);
        t.tokens.push_back(porter_stem(std::move(folded)));
    }
    return t;
}

// All proper single-token sub-terms of w, stopwords excluded:
// "Union of Myanmar" -> {Union, Myanmar}; single-token terms have none.
inline std::set<Term> sub_terms(const Term& w) {
    std::set<Term> out;
    if (w.size() <= 1) return out;
    std::vector<std::string> surface_words = word_tokens(w.surface);
    for (std::size_t i = 0; i < w.tokens.size(); ++i) {
        if (i < w.stop.size() && w.stop[i]) continue;
        Term t;
        t.tokens = {w.tokens[i]};
        t.stop = {false};
        t.surface = i < surface_words.size() ? surface_words[i] : w.tokens[i];
        out.insert(std::move(t));
    }
    return out;
}

namespace term_detail {

inline std::multiset<std::string> content_multiset(const Term& t) {
    auto v = t.content_tokens();
    return std::multiset<std::string>(v.begin(), v.end());
}

}  // namespace term_detail

// True iff a contains all of b's tokens, regardless of order (soft sub-term
// matching). Every term is a super-term of itself.
inline bool is_super_term(const Term& a, const Term& b) {
    auto ma = term_detail::content_multiset(a);
    for (const auto& tok : term_detail::content_multiset(b)) {
        auto it = ma.find(tok);
        if (it == ma.end()) return false;
        ma.erase(it);
    }
    return true;
}

// Strict sub-term check: b's tokens appear in a in their original order
// (possibly with gaps), e.g. "Cardinal Ratzinger" in "Cardinal Joseph Ratzinger".
inline bool is_ordered_sub_term(const Term& a, const Term& b) {
    auto ca = a.content_tokens();
    auto cb = b.content_tokens();
    std::size_t i = 0;
    for (const auto& tok : ca) {
        if (i < cb.size() && tok == cb[i]) ++i;
    }
    return i == cb.size();
}

inline Term concat_terms(const Term& a, const Term& b, std::size_t b_skip) {
    Term out = a;
    std::vector<std::string> b_words = word_tokens(b.surface);
    for (std::size_t i = b_skip; i < b.tokens.size(); ++i) {
        out.tokens.push_back(b.tokens[i]);
        out.stop.push_back(i < b.stop.size() ? static_cast<bool>(b.stop[i]) : false);
        if (i < b_words.size()) out.surface += " " + b_words[i];
    }
    return out;
}

}  // namespace tcoref

#endif  // TCOREF_TERM_HPP
