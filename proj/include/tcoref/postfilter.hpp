#ifndef TCOREF_POSTFILTER_HPP
#define TCOREF_POSTFILTER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcoref/coref.hpp"
#include "tcoref/eval.hpp"
#include "tcoref/term.hpp"

namespace tcoref {

// One co-reference candidate of the query: the term, the consolidated
// document frequency of its sub-term class, the consolidated source frequency
// of its relation to the query's class, and the class members.
struct Candidate {
    Term term;
    std::int64_t df = 0;
    std::int64_t sf = 0;
    std::set<Term> sub;

    friend bool operator<(const Candidate& a, const Candidate& b) { return a.term < b.term; }
    friend bool operator==(const Candidate& a, const Candidate& b) { return a.term == b.term; }
};

// The unfiltered candidate set around the query: one tuple per class
// connected to the query's own class.
inline std::set<Candidate> make_candidates(const Term& q, const ClassGraph& cg) {
    if (!cg.classes.count(q))
        throw std::invalid_argument("unknown term: '" + q.key() + "'");
    std::set<Candidate> out;
    for (const auto& rep : cg.related(q)) {
        const SubtermClass& cls = cg.classes.at(rep);
        const EdgeStats* edge = cg.edge(q, rep);
        Candidate c;
        c.term = rep;
        c.df = cls.doc_freq;
        c.sf = edge ? edge->src_freq : 0;
        c.sub = cls.members;
        out.insert(std::move(c));
    }
    return out;
}

struct PostFilterParams {
    double frequency_factor_k = 0.25;
    double weight_factor_l = 0.25;

    // The original write-up states the filter twice with different
    // inequalities; `prose` keeps candidates at or above the lower bounds
    // (the stated intent), `formula` mirrors the displayed set-builder
    // (keep at or below). Both are implemented for auditability.
    enum class Mode { prose, formula };
    Mode mode = Mode::prose;
};

// Frequency filter around the query: the maxima of df and sf over the
// candidates, scaled by k and l, act as lower bounds; a candidate survives by
// meeting either bound.
inline std::set<Candidate> aposteriori_filter(const std::set<Candidate>& candidates,
                                              const PostFilterParams& params) {
    if (params.frequency_factor_k < 0.0 || params.frequency_factor_k > 1.0 ||
        params.weight_factor_l < 0.0 || params.weight_factor_l > 1.0)
        throw std::invalid_argument("k and l must be within [0, 1]");
    if (candidates.empty()) return {};

    std::int64_t max_df = 0, max_sf = 0;
    for (const auto& c : candidates) {
        max_df = std::max(max_df, c.df);
        max_sf = std::max(max_sf, c.sf);
    }
    double df_bound = params.frequency_factor_k * static_cast<double>(max_df);
    double sf_bound = params.weight_factor_l * static_cast<double>(max_sf);

    std::set<Candidate> out;
    for (const auto& c : candidates) {
        bool keep;
        if (params.mode == PostFilterParams::Mode::prose) {
            keep = static_cast<double>(c.df) >= df_bound ||
                   static_cast<double>(c.sf) >= sf_bound;
        } else {
            keep = static_cast<double>(c.df) <= df_bound ||
                   static_cast<double>(c.sf) <= sf_bound;
        }
        if (keep) out.insert(c);
    }
    return out;
}

// Downstream filter applied inside the sweep, normally the semantic filter.
using SemanticHandle =
    std::function<std::set<Candidate>(const Term& query, const std::set<Candidate>&)>;

struct QueryCandidates {
    Term query;
    std::set<Candidate> candidates;
};

struct SweepCell {
    double k = 0.0, l = 0.0;
    double precision = 0.0, recall = 0.0, f = 0.0;
};

struct SweepResult {
    double k = 0.0, l = 0.0;
    std::vector<SweepCell> grid;
};

// Runs the a-posteriori filter over a (k, l) grid, applies the downstream
// filter, and picks the cell with the best F-measure (ties: higher precision,
// then smaller k, then smaller l).
inline SweepResult sweep_parameters(const std::vector<QueryCandidates>& per_query,
                                    const std::vector<TestEntry>& testset,
                                    const std::map<Term, std::int64_t>& expected_freqs,
                                    const SemanticHandle& semantic, double step = 0.05) {
    if (testset.empty()) throw std::invalid_argument("sweep: empty test set");
    if (step <= 0.0 || step > 1.0) throw std::invalid_argument("sweep: bad step");

    std::map<Term, const TestEntry*> entries;
    for (const auto& e : testset) entries[e.query] = &e;

    const int n = static_cast<int>(std::lround(1.0 / step));
    SweepResult result;
    std::size_t best = 0;
    bool have_best = false;
    for (int ki = 0; ki <= n; ++ki) {
        for (int li = 0; li <= n; ++li) {
            PostFilterParams params;
            params.frequency_factor_k = std::min(1.0, ki * step);
            params.weight_factor_l = std::min(1.0, li * step);

            double p_sum = 0.0, r_sum = 0.0;
            std::size_t p_count = 0, covered = 0;
            for (const auto& qc : per_query) {
                auto it = entries.find(qc.query);
                if (it == entries.end()) continue;
                ++covered;
                std::set<Candidate> filtered = aposteriori_filter(qc.candidates, params);
                if (semantic) filtered = semantic(qc.query, filtered);
                std::set<Term> result_terms;
                for (const auto& c : filtered) result_terms.insert(c.term);
                if (auto p = precision(result_terms, *it->second)) {
                    p_sum += *p;
                    ++p_count;
                }
                r_sum += recall(result_terms, *it->second, expected_freqs);
            }
            SweepCell cell;
            cell.k = params.frequency_factor_k;
            cell.l = params.weight_factor_l;
            cell.precision = p_count ? p_sum / static_cast<double>(p_count) : 0.0;
            cell.recall = covered ? r_sum / static_cast<double>(covered) : 0.0;
            cell.f = f_measure(cell.precision, cell.recall);
            result.grid.push_back(cell);
            const SweepCell& prev = result.grid[best];
            if (!have_best || cell.f > prev.f ||
                (cell.f == prev.f && cell.precision > prev.precision)) {
                best = result.grid.size() - 1;
                have_best = true;
            }
        }
    }
    result.k = result.grid[best].k;
    result.l = result.grid[best].l;
    return result;
}

}  // namespace tcoref

#endif  // TCOREF_POSTFILTER_HPP
