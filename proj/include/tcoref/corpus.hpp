#ifndef TCOREF_CORPUS_HPP
#define TCOREF_CORPUS_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "tcoref/term.hpp"
#include "tcoref/text.hpp"

namespace tcoref {

struct Date {
    int year = 0, month = 1, day = 1;
    friend auto operator<=>(const Date&, const Date&) = default;
};

struct DateTime {
    Date date;
    int seconds = 0;  // seconds since midnight, UTC
    friend auto operator<=>(const DateTime&, const DateTime&) = default;
};

namespace date_detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline int parse_int(std::string_view s) {
    int v = 0;
    for (char c : s) {
        if (!is_digit(c)) throw std::invalid_argument("bad number in date");
        v = v * 10 + (c - '0');
    }
    return v;
}

inline int days_in_month(int year, int month) {
    static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && (year % 4 == 0 && (year % 100 != 0 || year % 400 == 0))) return 29;
    return d[month - 1];
}

}  // namespace date_detail

// Accepts YYYY-MM-DD.
inline Date parse_date(std::string_view s) {
    using namespace date_detail;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        throw std::invalid_argument("bad date: '" + std::string(s) + "'");
    Date d{parse_int(s.substr(0, 4)), parse_int(s.substr(5, 2)), parse_int(s.substr(8, 2))};
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
        throw std::invalid_argument("bad date: '" + std::string(s) + "'");
    return d;
}

// Accepts YYYY-MM-DD or YYYY-MM-DDTHH:MM:SS, optionally with a trailing Z.
inline DateTime parse_datetime(std::string_view s) {
    using namespace date_detail;
    if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
    if (s.size() == 10) return DateTime{parse_date(s), 0};
    if (s.size() != 19 || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':')
        throw std::invalid_argument("bad datetime: '" + std::string(s) + "'");
    DateTime dt{parse_date(s.substr(0, 10)), 0};
    int h = parse_int(s.substr(11, 2)), m = parse_int(s.substr(14, 2)),
        sec = parse_int(s.substr(17, 2));
    if (h > 23 || m > 59 || sec > 60)
        throw std::invalid_argument("bad datetime: '" + std::string(s) + "'");
    dt.seconds = h * 3600 + m * 60 + sec;
    return dt;
}

inline std::string format_date(const Date& d) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

inline std::string format_datetime(const DateTime& dt) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", dt.date.year,
                  dt.date.month, dt.date.day, dt.seconds / 3600, (dt.seconds / 60) % 60,
                  dt.seconds % 60);
    return buf;
}

// Closed calendar interval; documents match on their publication date.
struct ChangePeriod {
    Date start;
    Date end;

    ChangePeriod() = default;
    ChangePeriod(Date s, Date e) : start(s), end(e) {
        if (end < start) throw std::invalid_argument("change period end before start");
    }

    bool contains(const DateTime& t) const { return start <= t.date && t.date <= end; }
    std::string str() const { return format_date(start) + ".." + format_date(end); }
    friend auto operator<=>(const ChangePeriod&, const ChangePeriod&) = default;
};

inline ChangePeriod year_period(int first_year, int last_year) {
    return ChangePeriod{Date{first_year, 1, 1}, Date{last_year, 12, 31}};
}

struct Source {
    std::string id;
};

struct Document {
    std::string id;
    std::string content;
    DateTime published_at;
    std::string source_id;
};

// Immutable after ingestion; safe to share across readers.
struct Corpus {
    std::vector<Document> documents;
    std::set<std::string> sources;

    std::optional<ChangePeriod> time_range() const {
        if (documents.empty()) return std::nullopt;
        Date lo = documents.front().published_at.date, hi = lo;
        for (const auto& d : documents) {
            lo = std::min(lo, d.published_at.date);
            hi = std::max(hi, d.published_at.date);
        }
        return ChangePeriod{lo, hi};
    }
};

namespace corpus_detail {

inline std::string escape_field(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string unescape_field(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) {
            out += s[i];
            continue;
        }
        switch (s[++i]) {
            case 't': out += '\t'; break;
            case 'n': out += '\n'; break;
            case 'r': out += '\r'; break;
            default: out += s[i];
        }
    }
    return out;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

}  // namespace corpus_detail

// Language gate from the ingestion pipeline: scans the first 1000
// whitespace-delimited words, case-folded, and accepts a text as English when
// more than 30% of them are stopwords. Pure in its two inputs.
inline bool is_english(std::string_view text, const Stopwords& stopwords) {
    auto tokens = split_whitespace(text);
    std::size_t n = std::min<std::size_t>(tokens.size(), 1000);
    if (n == 0) return false;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (stopwords.count(fold_case(tokens[i]))) ++hits;
    return hits * 10 > n * 3;
}

struct IngestResult {
    Corpus corpus;
    std::size_t skipped_records = 0;
    std::size_t rejected_non_english = 0;
};

enum class CorpusFormat { lines };

// Reads the line-delimited corpus format: one record per line,
// id \t source_id \t published_at(ISO-8601) \t content, with backslash
// escapes for tab/newline inside content. Malformed records are counted and
// skipped, never fatal; a file with zero valid records is an error.
inline IngestResult ingest_corpus(const std::string& path,
                                  CorpusFormat format = CorpusFormat::lines,
                                  const Stopwords* english_gate = nullptr) {
    (void)format;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read corpus file: " + path);
    IngestResult result;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = corpus_detail::split_tabs(line);
        if (fields.size() != 4) {
            ++result.skipped_records;
            continue;
        }
        Document doc;
        doc.id = std::string(fields[0]);
        doc.source_id = std::string(fields[1]);
        try {
            doc.published_at = parse_datetime(fields[2]);
        } catch (const std::invalid_argument&) {
            ++result.skipped_records;
            continue;
        }
        doc.content = corpus_detail::unescape_field(fields[3]);
        if (doc.id.empty() || doc.source_id.empty() || !seen_ids.insert(doc.id).second) {
            ++result.skipped_records;
            continue;
        }
        if (english_gate && !is_english(doc.content, *english_gate)) {
            ++result.rejected_non_english;
            continue;
        }
        result.corpus.sources.insert(doc.source_id);
        result.corpus.documents.push_back(std::move(doc));
    }
    if (result.corpus.documents.empty())
        throw std::runtime_error("zero valid records in corpus file: " + path);
    return result;
}

inline void write_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write corpus file: " + path);
    for (const auto& d : corpus.documents) {
        out << corpus_detail::escape_field(d.id) << '\t'
            << corpus_detail::escape_field(d.source_id) << '\t'
            << format_datetime(d.published_at) << '\t'
            << corpus_detail::escape_field(d.content) << '\n';
    }
}

// Normalized (case-folded, stemmed) token stream of a document body.
inline std::vector<std::string> normalized_tokens(std::string_view content) {
    std::vector<std::string> out;
    for (const auto& w : word_tokens(content)) out.push_back(normalize_token(w));
    return out;
}

inline bool contains_token_sequence(const std::vector<std::string>& haystack,
                                    const std::vector<std::string>& needle) {
    if (needle.empty() || haystack.size() < needle.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        if (std::equal(needle.begin(), needle.end(), haystack.begin() + i)) return true;
    }
    return false;
}

enum class QueryMode { full_term, any_sub_term };

inline bool document_matches(const Document& doc, const Term& term, QueryMode mode) {
    auto tokens = normalized_tokens(doc.content);
    if (contains_token_sequence(tokens, term.tokens)) return true;
    if (mode == QueryMode::any_sub_term) {
        std::unordered_set<std::string> present(tokens.begin(), tokens.end());
        for (const auto& sub : sub_terms(term))
            if (present.count(sub.tokens.front())) return true;
    }
    return false;
}

// Documents published within the period whose content contains the full term
// (token sequence after normalization), or any of its sub-terms in
// any-sub-term mode.
inline std::vector<const Document*> query_documents(const Corpus& corpus, const Term& term,
                                                    const ChangePeriod& period,
                                                    QueryMode mode) {
    if (term.empty()) throw std::invalid_argument("empty query term");
    std::vector<const Document*> out;
    for (const auto& doc : corpus.documents) {
        if (!period.contains(doc.published_at)) continue;
        if (document_matches(doc, term, mode)) out.push_back(&doc);
    }
    return out;
}

}  // namespace tcoref

#endif  // TCOREF_CORPUS_HPP
