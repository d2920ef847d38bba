#ifndef TCOREF_STOPWORDS_HPP
#define TCOREF_STOPWORDS_HPP

#include <fstream>
#include <stdexcept>
#include <string>

#include "tcoref/term.hpp"
#include "tcoref/text.hpp"

namespace tcoref {

// Loads a word list, one word per line. Lines are case-folded; blanks and
// '#' comments are skipped.
inline Stopwords load_wordlist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read word list: " + path);
    Stopwords words;
    std::string line;
    while (std::getline(in, line)) {
        std::string w = trim(line);
        if (w.empty() || w[0] == '#') continue;
        words.insert(fold_case(w));
    }
    if (words.empty()) throw std::runtime_error("word list is empty: " + path);
    return words;
}

}  // namespace tcoref

#endif  // TCOREF_STOPWORDS_HPP
