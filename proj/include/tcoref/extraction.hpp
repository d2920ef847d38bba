#ifndef TCOREF_EXTRACTION_HPP
#define TCOREF_EXTRACTION_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tcoref/term.hpp"
#include "tcoref/text.hpp"

namespace tcoref {

inline constexpr int kExtractorVersion = 1;

struct TermOccurrence {
    Term term;
    std::string document_id;
    std::size_t token_offset = 0;
    std::size_t token_len = 1;

    std::size_t span_end() const { return token_offset + token_len - 1; }
};

// Unordered pair of distinct terms seen within the window in one document.
struct CoocPair {
    Term a;
    Term b;
    std::string document_id;
    std::string source_id;
};

// Candidate name extraction: every phrase of one to three consecutive tokens
// where the first and last word are capitalized non-stopwords, interior words
// are stopwords or capitalized, and the whole surface is at least three
// characters. All contained sub-phrases that satisfy the same shape are
// emitted as well. Four-word terms are never extracted; they can only be
// formed later by the prolong rule.
inline std::vector<TermOccurrence> extract_terms(std::string_view text,
                                                 const Stopwords& stopwords,
                                                 const std::string& document_id = {}) {
    std::vector<std::string> raw = word_tokens(text);
    const std::size_t n = raw.size();
    std::vector<std::string> folded(n), stemmed(n);
    std::vector<bool> stop(n), cap(n);
    for (std::size_t i = 0; i < n; ++i) {
        folded[i] = fold_case(raw[i]);
        stemmed[i] = porter_stem(folded[i]);
        stop[i] = stopwords.count(folded[i]) > 0;
        cap[i] = starts_with_uppercase(raw[i]);
    }

    std::vector<TermOccurrence> out;
    for (std::size_t start = 0; start < n; ++start) {
        if (!cap[start] || stop[start]) continue;
        for (std::size_t len = 1; len <= 3 && start + len <= n; ++len) {
            std::size_t last = start + len - 1;
            if (!cap[last] || stop[last]) continue;
            bool interior_ok = true;
            for (std::size_t i = start + 1; i + 1 <= last && interior_ok; ++i)
                interior_ok = stop[i] || cap[i];
            if (!interior_ok) break;

            Term term;
            std::size_t surface_len = len - 1;  // separating spaces
            for (std::size_t i = start; i <= last; ++i) {
                term.tokens.push_back(stemmed[i]);
                term.stop.push_back(stop[i]);
                if (i > start) term.surface += ' ';
                term.surface += raw[i];
                surface_len += codepoint_count(raw[i]);
            }
            if (surface_len < 3) continue;
            out.push_back(TermOccurrence{std::move(term), document_id, start, len});
        }
    }
    return out;
}

namespace extraction_detail {

struct Span {
    std::size_t begin, end;
};

// Gap between nearest token boundaries; overlapping spans touch (gap 0).
inline std::size_t span_gap(const Span& a, const Span& b) {
    if (a.end < b.begin) return b.begin - a.end;
    if (b.end < a.begin) return a.begin - b.end;
    return 0;
}

}  // namespace extraction_detail

// Emits a pair when two occurrences of distinct terms lie within `window`
// tokens of each other in one document. An occurrence nested inside a longer
// extracted occurrence inherits the longer occurrence's reach, so a sub-term
// co-occurs with everything its enclosing term co-occurs with; the converse
// does not hold.
inline std::vector<CoocPair> cooccurrences(const std::vector<TermOccurrence>& occurrences,
                                           std::size_t window) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    using extraction_detail::Span;

    std::map<std::string, std::vector<const TermOccurrence*>> by_doc;
    for (const auto& o : occurrences) by_doc[o.document_id].push_back(&o);

    std::vector<CoocPair> out;
    for (auto& [doc_id, occs] : by_doc) {
        std::vector<Span> reach(occs.size());
        for (std::size_t i = 0; i < occs.size(); ++i) {
            Span r{occs[i]->token_offset, occs[i]->span_end()};
            for (std::size_t j = 0; j < occs.size(); ++j) {
                const auto& c = *occs[j];
                if (c.token_offset <= occs[i]->token_offset &&
                    occs[i]->span_end() <= c.span_end()) {
                    r.begin = std::min(r.begin, c.token_offset);
                    r.end = std::max(r.end, c.span_end());
                }
            }
            reach[i] = r;
        }
        std::set<std::pair<Term, Term>> seen;
        for (std::size_t i = 0; i < occs.size(); ++i) {
            for (std::size_t j = i + 1; j < occs.size(); ++j) {
                const Term& ta = occs[i]->term;
                const Term& tb = occs[j]->term;
                if (ta == tb) continue;
                if (extraction_detail::span_gap(reach[i], reach[j]) > window) continue;
                auto key = ta < tb ? std::make_pair(ta, tb) : std::make_pair(tb, ta);
                if (!seen.insert(key).second) continue;
                out.push_back(CoocPair{key.first, key.second, doc_id, {}});
            }
        }
    }
    return out;
}

// Read-through cache of extraction results keyed by (document id, extractor
// version). On disk one record per line:
//   document_id \t version \t offset:len:surface \t ...
// Saving goes through a temp file and rename.
class ExtractionCache {
public:
    ExtractionCache() = default;
    explicit ExtractionCache(std::string path) : path_(std::move(path)) { load(); }

    std::vector<TermOccurrence> get_or_extract(const std::string& document_id,
                                               std::string_view text,
                                               const Stopwords& stopwords) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = entries_.find(document_id);
            if (it != entries_.end()) return materialize(document_id, it->second, stopwords);
        }
        auto occurrences = extract_terms(text, stopwords, document_id);
        std::lock_guard<std::mutex> lock(mu_);
        auto& slots = entries_[document_id];
        slots.clear();
        for (const auto& o : occurrences)
            slots.push_back(Slot{o.token_offset, o.token_len, o.term.surface});
        dirty_ = true;
        return occurrences;
    }

    void save() const {
        if (path_.empty() || !dirty_) return;
        std::lock_guard<std::mutex> lock(mu_);
        std::string tmp = path_ + ".tmp";
        {
            std::ofstream out(tmp);
            if (!out) throw std::runtime_error("cannot write extraction cache: " + tmp);
            for (const auto& [doc_id, slots] : entries_) {
                out << doc_id << '\t' << kExtractorVersion;
                for (const auto& s : slots)
                    out << '\t' << s.offset << ':' << s.len << ':' << s.surface;
                out << '\n';
            }
        }
        std::filesystem::rename(tmp, path_);
        dirty_ = false;
    }

    std::size_t size() const {
        std::lock_guard<std::mutex> lock(mu_);
        return entries_.size();
    }

private:
    struct Slot {
        std::size_t offset, len;
        std::string surface;
    };

    void load() {
        std::ifstream in(path_);
        if (!in) return;  // cold cache
        std::string line;
        while (std::getline(in, line)) {
            std::size_t tab1 = line.find('\t');
            if (tab1 == std::string::npos) continue;
            std::size_t tab2 = line.find('\t', tab1 + 1);
            std::string doc_id = line.substr(0, tab1);
            std::string version = line.substr(tab1 + 1, (tab2 == std::string::npos
                                                             ? line.size()
                                                             : tab2) - tab1 - 1);
            if (version != std::to_string(kExtractorVersion)) continue;
            std::vector<Slot> slots;
            std::size_t pos = tab2;
            bool ok = true;
            while (pos != std::string::npos && pos < line.size()) {
                std::size_t next = line.find('\t', pos + 1);
                std::string field = line.substr(
                    pos + 1, (next == std::string::npos ? line.size() : next) - pos - 1);
                std::size_t c1 = field.find(':');
                std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                                         : field.find(':', c1 + 1);
                if (c2 == std::string::npos) {
                    ok = false;
                    break;
                }
                try {
                    slots.push_back(Slot{std::stoul(field.substr(0, c1)),
                                         std::stoul(field.substr(c1 + 1, c2 - c1 - 1)),
                                         field.substr(c2 + 1)});
                } catch (const std::exception&) {
                    ok = false;
                    break;
                }
                pos = next;
            }
            if (ok) entries_[doc_id] = std::move(slots);
        }
    }

    std::vector<TermOccurrence> materialize(const std::string& document_id,
                                            const std::vector<Slot>& slots,
                                            const Stopwords& stopwords) const {
        std::vector<TermOccurrence> out;
        out.reserve(slots.size());
        for (const auto& s : slots)
            out.push_back(TermOccurrence{normalize_term(s.surface, stopwords), document_id,
                                         s.offset, s.len});
        return out;
    }

    std::string path_;
    std::map<std::string, std::vector<Slot>> entries_;
    mutable std::mutex mu_;
    mutable bool dirty_ = false;
};

}  // namespace tcoref

#endif  // TCOREF_EXTRACTION_HPP
