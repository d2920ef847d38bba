#ifndef TCOREF_PORTER_HPP
#define TCOREF_PORTER_HPP

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace tcoref {

// Porter's suffix stripping algorithm, as originally published (1980), without
// the later revisions found in some distributions (step 1c and the -bli/-ogi
// rules keep their original form here).
//
// Input is expected case-folded. Words shorter than three letters and words
// containing anything outside a-z (digits, non-ASCII names) pass through
// unchanged.
namespace porter_detail {

inline bool is_cons(const std::string& w, std::size_t i) {
    switch (w[i]) {
        case 'a': case 'e': case 'i': case 'o': case 'u':
            return false;
        case 'y':
            return i == 0 ? true : !is_cons(w, i - 1);
        default:
            return true;
    }
}

// Measure of w[0..n): the m in [C](VC)^m[V].
inline int measure(const std::string& w, std::size_t n) {
    int m = 0;
    std::size_t i = 0;
    while (i < n && is_cons(w, i)) ++i;
    while (true) {
        while (i < n && !is_cons(w, i)) ++i;
        if (i >= n) break;
        ++m;
        while (i < n && is_cons(w, i)) ++i;
    }
    return m;
}

inline bool has_vowel(const std::string& w, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!is_cons(w, i)) return true;
    return false;
}

inline bool ends_double_cons(const std::string& w, std::size_t n) {
    return n >= 2 && w[n - 1] == w[n - 2] && is_cons(w, n - 1);
}

// *o: stem ends consonant-vowel-consonant and the final consonant is not w, x or y.
inline bool ends_cvc(const std::string& w, std::size_t n) {
    if (n < 3) return false;
    if (!is_cons(w, n - 3) || is_cons(w, n - 2) || !is_cons(w, n - 1)) return false;
    char c = w[n - 1];
    return c != 'w' && c != 'x' && c != 'y';
}

inline bool ends_with(const std::string& w, std::string_view suffix) {
    return w.size() >= suffix.size() &&
           w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct Rule {
    std::string_view suffix;
    std::string_view replacement;
};

// Applies the longest matching rule whose condition holds on the stem. Once the
// longest matching suffix is found, only its condition is checked; a failing
// condition does not fall through to shorter suffixes.
template <std::size_t N, typename Cond>
bool apply_rules(std::string& w, const std::array<Rule, N>& rules, Cond cond) {
    const Rule* best = nullptr;
    for (const Rule& r : rules) {
        if (ends_with(w, r.suffix) && (!best || r.suffix.size() > best->suffix.size()))
            best = &r;
    }
    if (!best) return false;
    std::size_t stem_len = w.size() - best->suffix.size();
    if (!cond(w, stem_len, best->suffix)) return false;
    w.resize(stem_len);
    w += best->replacement;
    return true;
}

inline void step1a(std::string& w) {
    static constexpr std::array<Rule, 4> rules{
        Rule{"sses", "ss"}, Rule{"ies", "i"}, Rule{"ss", "ss"}, Rule{"s", ""}};
    apply_rules(w, rules,
                [](const std::string&, std::size_t, std::string_view) { return true; });
}

inline void step1b(std::string& w) {
    if (ends_with(w, "eed")) {
        if (measure(w, w.size() - 3) > 0) w.resize(w.size() - 1);
        return;
    }
    bool stripped = false;
    if (ends_with(w, "ed") && has_vowel(w, w.size() - 2)) {
        w.resize(w.size() - 2);
        stripped = true;
    } else if (ends_with(w, "ing") && has_vowel(w, w.size() - 3)) {
        w.resize(w.size() - 3);
        stripped = true;
    }
    if (!stripped) return;
    if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
        w += 'e';
    } else if (ends_double_cons(w, w.size())) {
        char c = w.back();
        if (c != 'l' && c != 's' && c != 'z') w.pop_back();
    } else if (measure(w, w.size()) == 1 && ends_cvc(w, w.size())) {
        w += 'e';
    }
}

inline void step1c(std::string& w) {
    if (ends_with(w, "y") && has_vowel(w, w.size() - 1)) w.back() = 'i';
}

inline void step2(std::string& w) {
    static constexpr std::array<Rule, 20> rules{
        Rule{"ational", "ate"}, Rule{"tional", "tion"}, Rule{"enci", "ence"},
        Rule{"anci", "ance"},   Rule{"izer", "ize"},    Rule{"abli", "able"},
        Rule{"alli", "al"},     Rule{"entli", "ent"},   Rule{"eli", "e"},
        Rule{"ousli", "ous"},   Rule{"ization", "ize"}, Rule{"ation", "ate"},
        Rule{"ator", "ate"},    Rule{"alism", "al"},    Rule{"iveness", "ive"},
        Rule{"fulness", "ful"}, Rule{"ousness", "ous"}, Rule{"aliti", "al"},
        Rule{"iviti", "ive"},   Rule{"biliti", "ble"}};
    apply_rules(w, rules, [](const std::string& s, std::size_t n, std::string_view) {
        return measure(s, n) > 0;
    });
}

inline void step3(std::string& w) {
    static constexpr std::array<Rule, 7> rules{
        Rule{"icate", "ic"}, Rule{"ative", ""}, Rule{"alize", "al"},
        Rule{"iciti", "ic"}, Rule{"ical", "ic"}, Rule{"ful", ""},
        Rule{"ness", ""}};
    apply_rules(w, rules, [](const std::string& s, std::size_t n, std::string_view) {
        return measure(s, n) > 0;
    });
}

inline void step4(std::string& w) {
    static constexpr std::array<Rule, 19> rules{
        Rule{"al", ""},   Rule{"ance", ""}, Rule{"ence", ""}, Rule{"er", ""},
        Rule{"ic", ""},   Rule{"able", ""}, Rule{"ible", ""}, Rule{"ant", ""},
        Rule{"ement", ""}, Rule{"ment", ""}, Rule{"ent", ""},  Rule{"ion", ""},
        Rule{"ou", ""},   Rule{"ism", ""},  Rule{"ate", ""},  Rule{"iti", ""},
        Rule{"ous", ""},  Rule{"ive", ""},  Rule{"ize", ""}};
    apply_rules(w, rules, [](const std::string& s, std::size_t n, std::string_view suffix) {
        if (measure(s, n) <= 1) return false;
        if (suffix == "ion") return n > 0 && (s[n - 1] == 's' || s[n - 1] == 't');
        return true;
    });
}

inline void step5a(std::string& w) {
    if (!ends_with(w, "e")) return;
    std::size_t n = w.size() - 1;
    int m = measure(w, n);
    if (m > 1 || (m == 1 && !ends_cvc(w, n))) w.pop_back();
}

inline void step5b(std::string& w) {
    if (ends_double_cons(w, w.size()) && w.back() == 'l' && measure(w, w.size()) > 1)
        w.pop_back();
}

}  // namespace porter_detail

inline std::string porter_stem(std::string word) {
    if (word.size() <= 2) return word;
    for (char c : word)
        if (c < 'a' || c > 'z') return word;
    using namespace porter_detail;
    step1a(word);
    step1b(word);
    step1c(word);
    step2(word);
    step3(word);
    step4(word);
    step5a(word);
    step5b(word);
    return word;
}

}  // namespace tcoref

#endif  // TCOREF_PORTER_HPP
