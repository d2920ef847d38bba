#ifndef TCOREF_EVAL_HPP
#define TCOREF_EVAL_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tcoref/corpus.hpp"
#include "tcoref/term.hpp"

namespace tcoref {

// One test-set row: the query, the expected names grouped into sets of
// interchangeable alternatives, and the known change periods.
struct TestEntry {
    Term query;
    std::vector<std::set<Term>> expected_groups;
    std::vector<ChangePeriod> periods;

    std::set<Term> all_expected() const {
        std::set<Term> out;
        for (const auto& g : expected_groups) out.insert(g.begin(), g.end());
        return out;
    }
};

namespace eval_detail {

inline std::vector<std::string> split_on(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

inline int parse_year(std::string_view s) {
    if (s.size() != 4) throw std::runtime_error("bad year: '" + std::string(s) + "'");
    int v = 0;
    for (char c : s) {
        if (c < '0' || c > '9')
            throw std::runtime_error("bad year: '" + std::string(s) + "'");
        v = v * 10 + (c - '0');
    }
    return v;
}

// Period tokens: YYYY, YYYY..YYYY, or YYYY-MM. Years expand to the calendar
// year; a change annotated in January admits the preceding year as well.
inline ChangePeriod parse_period_token(std::string_view token) {
    std::string t = trim(token);
    if (auto dots = t.find(".."); dots != std::string::npos) {
        int y1 = parse_year(std::string_view(t).substr(0, dots));
        int y2 = parse_year(std::string_view(t).substr(dots + 2));
        if (y2 < y1) std::swap(y1, y2);
        return year_period(y1, y2);
    }
    if (t.size() == 7 && t[4] == '-') {
        int y = parse_year(std::string_view(t).substr(0, 4));
        std::string_view mm = std::string_view(t).substr(5, 2);
        if (mm.size() != 2 || mm[0] < '0' || mm[0] > '9' || mm[1] < '0' || mm[1] > '9')
            throw std::runtime_error("bad period token: '" + t + "'");
        int month = (mm[0] - '0') * 10 + (mm[1] - '0');
        if (month < 1 || month > 12)
            throw std::runtime_error("bad period token: '" + t + "'");
        if (month == 1) return ChangePeriod{Date{y - 1, 1, 1}, Date{y, 12, 31}};
        return year_period(y, y);
    }
    return year_period(parse_year(t), parse_year(t));
}

}  // namespace eval_detail

// Test-set file format, one entry per line:
//   query | group;group;... | period period ...
// Names within a group are comma-separated alternatives. Blank lines and
// '#' comments are skipped; duplicate query rows merge.
inline std::vector<TestEntry> load_testset(const std::string& path,
                                           const Stopwords& stopwords) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read test set: " + path);
    std::map<Term, TestEntry> merged;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto fields = eval_detail::split_on(t, '|');
        if (fields.size() != 3)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 'query | groups | periods'");
        TestEntry entry;
        entry.query = normalize_term(fields[0], stopwords);
        for (const auto& group_text : eval_detail::split_on(fields[1], ';')) {
            if (group_text.empty()) continue;
            std::set<Term> group;
            for (const auto& name : eval_detail::split_on(group_text, ',')) {
                if (!name.empty()) group.insert(normalize_term(name, stopwords));
            }
            if (!group.empty()) entry.expected_groups.push_back(std::move(group));
        }
        for (const auto& token : eval_detail::split_on(fields[2], ' ')) {
            if (!token.empty()) entry.periods.push_back(eval_detail::parse_period_token(token));
        }
        if (entry.expected_groups.empty() || entry.periods.empty())
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": entry needs expected names and periods");

        auto [it, inserted] = merged.emplace(entry.query, entry);
        if (!inserted) {
            for (auto& g : entry.expected_groups) {
                if (std::find(it->second.expected_groups.begin(),
                              it->second.expected_groups.end(),
                              g) == it->second.expected_groups.end())
                    it->second.expected_groups.push_back(std::move(g));
            }
            for (const auto& p : entry.periods) {
                if (std::find(it->second.periods.begin(), it->second.periods.end(), p) ==
                    it->second.periods.end())
                    it->second.periods.push_back(p);
            }
        }
    }
    std::vector<TestEntry> out;
    for (auto& [key, entry] : merged) {
        (void)key;
        out.push_back(std::move(entry));
    }
    return out;
}

namespace eval_detail {

inline bool present_in_corpus(const Corpus& corpus, const Term& term) {
    for (const auto& doc : corpus.documents)
        if (contains_token_sequence(normalized_tokens(doc.content), term.tokens))
            return true;
    return false;
}

}  // namespace eval_detail

// Drops queries absent from the corpus or whose periods all fall outside its
// time range, removes expected names the corpus never mentions, and drops
// entries left without expected names.
inline std::vector<TestEntry> adapt_testset(const std::vector<TestEntry>& testset,
                                            const Corpus& corpus) {
    std::vector<TestEntry> out;
    auto range = corpus.time_range();
    if (!range) return out;
    for (const auto& entry : testset) {
        TestEntry adapted;
        adapted.query = entry.query;
        for (const auto& p : entry.periods)
            if (p.start <= range->end && range->start <= p.end) adapted.periods.push_back(p);
        if (adapted.periods.empty()) continue;
        if (!eval_detail::present_in_corpus(corpus, entry.query)) continue;
        for (const auto& group : entry.expected_groups) {
            std::set<Term> kept;
            for (const auto& name : group)
                if (eval_detail::present_in_corpus(corpus, name)) kept.insert(name);
            if (!kept.empty()) adapted.expected_groups.push_back(std::move(kept));
        }
        if (adapted.expected_groups.empty()) continue;
        out.push_back(std::move(adapted));
    }
    return out;
}

// Document frequency of each expected name (and each query) over the corpus;
// drives the dynamic recall thresholds.
inline std::map<Term, std::int64_t> expected_name_frequencies(
    const std::vector<TestEntry>& testset, const Corpus& corpus) {
    std::set<Term> names;
    for (const auto& entry : testset) {
        names.insert(entry.query);
        auto expected = entry.all_expected();
        names.insert(expected.begin(), expected.end());
    }
    std::map<Term, std::int64_t> freq;
    for (const auto& n : names) freq[n] = 0;
    for (const auto& doc : corpus.documents) {
        auto tokens = normalized_tokens(doc.content);
        for (auto& [name, count] : freq)
            if (contains_token_sequence(tokens, name.tokens)) ++count;
    }
    return freq;
}

// Dynamic recall threshold from the most frequent expected co-reference:
// below 100 occurrences the threshold is 5, from 100 it is 10, from 500 it
// is 50, from 1000 it is 100.
inline std::int64_t recall_threshold(std::int64_t max_expected_freq) {
    if (max_expected_freq >= 1000) return 100;
    if (max_expected_freq >= 500) return 50;
    if (max_expected_freq >= 100) return 10;
    return 5;
}

// A group counts as found when any member appears as a full normalized term
// in the result. Only groups whose most frequent member exceeds the entry's
// threshold are eligible. When no expected name exceeds the base threshold,
// finding any of them still counts as full recall.
inline double recall(const std::set<Term>& result, const TestEntry& entry,
                     const std::map<Term, std::int64_t>& freqs) {
    auto freq_of = [&](const Term& t) {
        auto it = freqs.find(t);
        return it == freqs.end() ? 0 : it->second;
    };
    std::int64_t max_freq = 0;
    for (const auto& name : entry.all_expected())
        max_freq = std::max(max_freq, freq_of(name));
    std::int64_t threshold = recall_threshold(max_freq);

    std::size_t eligible = 0, found = 0;
    for (const auto& group : entry.expected_groups) {
        std::int64_t group_max = 0;
        bool group_found = false;
        for (const auto& name : group) {
            group_max = std::max(group_max, freq_of(name));
            if (result.count(name)) group_found = true;
        }
        if (group_max <= threshold) continue;
        ++eligible;
        if (group_found) ++found;
    }
    if (eligible == 0) {
        for (const auto& name : entry.all_expected())
            if (result.count(name)) return 1.0;
        return 0.0;
    }
    return static_cast<double>(found) / static_cast<double>(eligible);
}

// Result terms that equal, or are sub-terms of, an expected name or the query
// term itself.
inline std::size_t correct_result_count(const std::set<Term>& result, const TestEntry& entry) {
    std::set<Term> pool = entry.all_expected();
    pool.insert(entry.query);
    std::size_t correct = 0;
    for (const auto& r : result) {
        for (const auto& e : pool) {
            if (is_super_term(e, r)) {
                ++correct;
                break;
            }
        }
    }
    return correct;
}

// An empty result has no defined precision.
inline std::optional<double> precision(const std::set<Term>& result, const TestEntry& entry) {
    if (result.empty()) return std::nullopt;
    return static_cast<double>(correct_result_count(result, entry)) /
           static_cast<double>(result.size());
}

inline double f_measure(double p, double r) {
    return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
}

struct QueryMetrics {
    Term query;
    std::optional<double> precision;  // empty result -> no value
    double recall = 0.0;
};

struct StageMetrics {
    std::string stage;
    std::vector<QueryMetrics> per_query;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f = 0.0;
    double micro_precision = 0.0, micro_recall = 0.0, micro_f = 0.0;
    std::size_t no_result_queries = 0;
};

struct EvalReport {
    std::vector<StageMetrics> stages;
};

// Per-stage results keyed by query term.
using StageResults = std::map<Term, std::set<Term>>;

inline StageMetrics evaluate_stage(const std::string& stage, const StageResults& results,
                                   const std::vector<TestEntry>& testset,
                                   const std::map<Term, std::int64_t>& freqs) {
    StageMetrics m;
    m.stage = stage;
    double p_sum = 0.0, r_sum = 0.0;
    std::size_t p_count = 0;
    std::size_t correct_total = 0, result_total = 0;
    double found_total = 0, eligible_total = 0;
    for (const auto& entry : testset) {
        static const std::set<Term> kEmpty;
        auto it = results.find(entry.query);
        const std::set<Term>& result = it == results.end() ? kEmpty : it->second;

        QueryMetrics qm;
        qm.query = entry.query;
        qm.precision = precision(result, entry);
        qm.recall = recall(result, entry, freqs);
        if (qm.precision) {
            p_sum += *qm.precision;
            ++p_count;
            correct_total += correct_result_count(result, entry);
            result_total += result.size();
        } else {
            ++m.no_result_queries;
        }
        r_sum += qm.recall;
        // Micro recall counts each entry's eligible groups; the rare-entity
        // clause contributes a single unit.
        std::int64_t max_freq = 0;
        for (const auto& name : entry.all_expected())
            max_freq = std::max(max_freq, freqs.count(name) ? freqs.at(name) : 0);
        std::int64_t threshold = recall_threshold(max_freq);
        std::size_t eligible = 0;
        for (const auto& group : entry.expected_groups) {
            std::int64_t group_max = 0;
            for (const auto& name : group)
                group_max = std::max(group_max, freqs.count(name) ? freqs.at(name) : 0);
            if (group_max > threshold) ++eligible;
        }
        if (eligible == 0) {
            eligible_total += 1;
            found_total += qm.recall;
        } else {
            eligible_total += static_cast<double>(eligible);
            found_total += qm.recall * static_cast<double>(eligible);
        }
        m.per_query.push_back(std::move(qm));
    }
    m.macro_precision = p_count ? p_sum / static_cast<double>(p_count) : 0.0;
    m.macro_recall = testset.empty() ? 0.0 : r_sum / static_cast<double>(testset.size());
    m.macro_f = f_measure(m.macro_precision, m.macro_recall);
    m.micro_precision = result_total
                            ? static_cast<double>(correct_total) / static_cast<double>(result_total)
                            : 0.0;
    m.micro_recall = eligible_total > 0 ? found_total / eligible_total : 0.0;
    m.micro_f = f_measure(m.micro_precision, m.micro_recall);
    return m;
}

// Stage rows in pipeline order (unfiltered, frequency-filtered,
// semantic-filtered), macro averages as the headline.
inline EvalReport evaluate(const std::vector<std::pair<std::string, StageResults>>& stages,
                           const std::vector<TestEntry>& testset,
                           const std::map<Term, std::int64_t>& freqs) {
    if (testset.empty()) throw std::invalid_argument("evaluate: empty test set");
    EvalReport report;
    for (const auto& [name, results] : stages)
        report.stages.push_back(evaluate_stage(name, results, testset, freqs));
    return report;
}

}  // namespace tcoref

#endif  // TCOREF_EVAL_HPP
