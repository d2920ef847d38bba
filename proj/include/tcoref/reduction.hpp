#ifndef TCOREF_REDUCTION_HPP
#define TCOREF_REDUCTION_HPP

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcoref/corpus.hpp"
#include "tcoref/term.hpp"

namespace tcoref {

// Corpus focused on the query's domain: the sources that mention the full
// query term during the period, and every document of those sources. Holds
// pointers into the (immutable) corpus it was derived from.
struct ReducedDataset {
    const Corpus* corpus = nullptr;
    std::vector<const Document*> documents;
    std::set<std::string> sources;
    Term query;
    ChangePeriod period;

    bool empty() const { return sources.empty(); }
};

// Keeps sources with at least one document containing the entire query within
// the period, then all documents from those sources. An empty result means
// the query is absent in the period, which callers report rather than fail.
inline ReducedDataset filter_sources(const Corpus& corpus, const Term& q,
                                     const ChangePeriod& period) {
    ReducedDataset out;
    out.corpus = &corpus;
    out.query = q;
    out.period = period;
    for (const auto& doc : corpus.documents) {
        if (!period.contains(doc.published_at)) continue;
        if (out.sources.count(doc.source_id)) continue;
        if (document_matches(doc, q, QueryMode::full_term)) out.sources.insert(doc.source_id);
    }
    for (const auto& doc : corpus.documents)
        if (out.sources.count(doc.source_id)) out.documents.push_back(&doc);
    return out;
}

// Tightens the change period to [minDate, maxDate] over the documents that
// contain the full query term within the original period, across all sources.
inline ChangePeriod narrow_period(const ReducedDataset& dataset, const Term& q,
                                  const ChangePeriod& period) {
    bool found = false;
    Date lo{}, hi{};
    for (const Document* doc : dataset.documents) {
        if (!period.contains(doc->published_at)) continue;
        if (!document_matches(*doc, q, QueryMode::full_term)) continue;
        Date d = doc->published_at.date;
        if (!found) {
            lo = hi = d;
            found = true;
        } else {
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    }
    if (!found) throw std::runtime_error("no full-term occurrence of '" + q.surface +
                                         "' in period " + period.str());
    return ChangePeriod{lo, hi};
}

// Documents of the reduced dataset that match the term within the period.
inline std::vector<const Document*> query_documents(const ReducedDataset& dataset,
                                                    const Term& term,
                                                    const ChangePeriod& period,
                                                    QueryMode mode) {
    if (term.empty()) throw std::invalid_argument("empty query term");
    std::vector<const Document*> out;
    for (const Document* doc : dataset.documents) {
        if (!period.contains(doc->published_at)) continue;
        if (document_matches(*doc, term, mode)) out.push_back(doc);
    }
    return out;
}

}  // namespace tcoref

#endif  // TCOREF_REDUCTION_HPP
