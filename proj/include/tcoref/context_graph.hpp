#ifndef TCOREF_CONTEXT_GRAPH_HPP
#define TCOREF_CONTEXT_GRAPH_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcoref/corpus.hpp"
#include "tcoref/extraction.hpp"
#include "tcoref/term.hpp"

namespace tcoref {

struct NodeStats {
    std::int64_t doc_freq = 0;  // documents containing the term
    std::int64_t src_freq = 0;  // distinct sources containing it
    friend bool operator==(const NodeStats&, const NodeStats&) = default;
};

struct EdgeStats {
    std::int64_t doc_freq = 0;  // documents where the pair co-occurs
    std::int64_t src_freq = 0;  // distinct sources where it co-occurs
    friend bool operator==(const EdgeStats&, const EdgeStats&) = default;
};

using TermPair = std::pair<Term, Term>;

inline TermPair make_term_pair(const Term& a, const Term& b) {
    return a < b ? TermPair{a, b} : TermPair{b, a};
}

struct ContextGraph {
    std::map<Term, NodeStats> nodes;
    std::map<TermPair, EdgeStats> edges;
    std::int64_t source_count = 0;  // sources of the document set the graph was built from

    bool has_node(const Term& t) const { return nodes.count(t) > 0; }

    const EdgeStats* edge(const Term& a, const Term& b) const {
        auto it = edges.find(make_term_pair(a, b));
        return it == edges.end() ? nullptr : &it->second;
    }

    std::vector<const Term*> neighbors(const Term& t) const {
        std::vector<const Term*> out;
        for (const auto& [pair, stats] : edges) {
            (void)stats;
            if (pair.first == t) out.push_back(&pair.second);
            else if (pair.second == t) out.push_back(&pair.first);
        }
        return out;
    }
};

// Aggregates per-document extraction results into node and edge frequencies.
// The surface kept for each term is its most frequent spelling.
inline ContextGraph build_context_graph(const std::vector<const Document*>& documents,
                                        std::size_t window, const Stopwords& stopwords,
                                        ExtractionCache* cache = nullptr) {
    struct NodeAcc {
        std::int64_t doc_freq = 0;
        std::set<std::string> sources;
        std::map<std::string, std::int64_t> spellings;
        Term term;
    };
    struct EdgeAcc {
        std::int64_t doc_freq = 0;
        std::set<std::string> sources;
    };
    std::map<std::string, NodeAcc> nodes;
    std::map<std::pair<std::string, std::string>, EdgeAcc> edges;
    std::set<std::string> all_sources;

    for (const Document* doc : documents) {
        all_sources.insert(doc->source_id);
        std::vector<TermOccurrence> occs =
            cache ? cache->get_or_extract(doc->id, doc->content, stopwords)
                  : extract_terms(doc->content, stopwords, doc->id);
        std::set<std::string> seen_terms;
        for (const auto& o : occs) {
            auto& acc = nodes[o.term.key()];
            if (acc.term.empty()) acc.term = o.term;
            acc.spellings[o.term.surface] += 1;
            if (seen_terms.insert(o.term.key()).second) {
                acc.doc_freq += 1;
                acc.sources.insert(doc->source_id);
            }
        }
        for (const auto& p : cooccurrences(occs, window)) {
            auto& acc = edges[{p.a.key(), p.b.key()}];
            acc.doc_freq += 1;
            acc.sources.insert(doc->source_id);
        }
    }

    ContextGraph graph;
    graph.source_count = static_cast<std::int64_t>(all_sources.size());
    std::map<std::string, Term> final_terms;
    for (auto& [key, acc] : nodes) {
        Term term = acc.term;
        std::int64_t best = 0;
        for (const auto& [spelling, count] : acc.spellings) {
            if (count > best) {
                best = count;
                term.surface = spelling;
            }
        }
        final_terms[key] = term;
        graph.nodes[term] =
            NodeStats{acc.doc_freq, static_cast<std::int64_t>(acc.sources.size())};
    }
    for (auto& [key, acc] : edges) {
        graph.edges[make_term_pair(final_terms[key.first], final_terms[key.second])] =
            EdgeStats{acc.doc_freq, static_cast<std::int64_t>(acc.sources.size())};
    }
    return graph;
}

// Schedule constants for the adaptive a-priori frequency filter. The document
// threshold starts at start_fraction of the lowest document frequency among
// the query's sub-term nodes; the source thresholds start at fractions of the
// total source count. All thresholds shrink by `decay` per step until enough
// terms are kept or the floor is reached.
struct AprioriParams {
    double start_fraction = 0.1;
    double src_fraction = 0.1;
    double rel_src_fraction = 0.05;
    double decay = 0.5;
    double floor = 2.0;
    std::size_t target_terms = 50;
};

namespace graph_detail {

inline std::set<std::string> query_tokens(const Term& q) {
    auto content = q.content_tokens();
    return std::set<std::string>(content.begin(), content.end());
}

inline bool contains_query_token(const Term& t, const std::set<std::string>& qtokens) {
    for (const auto& tok : t.tokens)
        if (qtokens.count(tok)) return true;
    return false;
}

}  // namespace graph_detail

// Iteratively relaxed frequency filter around the query. A term survives a
// step when it meets both node thresholds or contains a query sub-term; an
// edge survives when both endpoints survive or the relation itself is
// source-frequent, in which case it keeps its endpoints alive as well.
inline ContextGraph apriori_filter(const ContextGraph& graph, const Term& q,
                                   const AprioriParams& params) {
    if (params.decay <= 0.0 || params.decay >= 1.0)
        throw std::invalid_argument("decay must be in (0, 1)");
    if (params.target_terms < 1) throw std::invalid_argument("target_terms must be >= 1");

    // For a multi-word query the seeds are its single-token sub-terms; a
    // single-token query seeds itself.
    auto qtokens = graph_detail::query_tokens(q);
    std::int64_t seed_df = -1;
    for (const auto& [term, stats] : graph.nodes) {
        if (term.size() == 1 && qtokens.count(term.tokens.front()))
            seed_df = seed_df < 0 ? stats.doc_freq : std::min(seed_df, stats.doc_freq);
    }
    if (seed_df < 0) {
        for (const auto& [term, stats] : graph.nodes) {
            if (graph_detail::contains_query_token(term, qtokens))
                seed_df = seed_df < 0 ? stats.doc_freq : std::min(seed_df, stats.doc_freq);
        }
    }
    if (seed_df < 0) throw std::runtime_error("query absent from graph: " + q.surface);

    double min_doc_fr = params.start_fraction * static_cast<double>(seed_df);
    double min_src_fr = params.src_fraction * static_cast<double>(graph.source_count);
    double min_rel_src_fr =
        params.rel_src_fraction * static_cast<double>(graph.source_count);

    std::set<Term> final_nodes;
    std::set<TermPair> final_edges;
    while (true) {
        std::set<Term> kept;
        for (const auto& [term, stats] : graph.nodes) {
            bool frequent = static_cast<double>(stats.doc_freq) >= min_doc_fr &&
                            static_cast<double>(stats.src_freq) >= min_src_fr;
            if (frequent || graph_detail::contains_query_token(term, qtokens))
                kept.insert(term);
        }
        final_nodes = kept;
        final_edges.clear();
        for (const auto& [pair, stats] : graph.edges) {
            bool endpoints_kept = kept.count(pair.first) && kept.count(pair.second);
            bool frequent_relation =
                static_cast<double>(stats.src_freq) >= min_rel_src_fr;
            if (endpoints_kept || frequent_relation) {
                final_edges.insert(pair);
                final_nodes.insert(pair.first);
                final_nodes.insert(pair.second);
            }
        }
        bool at_floor = min_doc_fr <= params.floor && min_src_fr <= params.floor &&
                        min_rel_src_fr <= params.floor;
        if (final_nodes.size() >= params.target_terms || at_floor) break;
        auto relax = [&](double x) {
            return x <= params.floor ? x : std::max(params.floor, x * params.decay);
        };
        min_doc_fr = relax(min_doc_fr);
        min_src_fr = relax(min_src_fr);
        min_rel_src_fr = relax(min_rel_src_fr);
    }

    ContextGraph out;
    out.source_count = graph.source_count;
    for (const auto& term : final_nodes) out.nodes[term] = graph.nodes.at(term);
    for (const auto& pair : final_edges) out.edges[pair] = graph.edges.at(pair);
    return out;
}

inline void dump_nodes(const ContextGraph& graph, std::ostream& out) {
    out << "term\tsurface\tdoc_freq\tsrc_freq\n";
    for (const auto& [term, stats] : graph.nodes)
        out << term.key() << '\t' << term.surface << '\t' << stats.doc_freq << '\t'
            << stats.src_freq << '\n';
}

inline void dump_edges(const ContextGraph& graph, std::ostream& out) {
    out << "a\tb\tdoc_freq\tsrc_freq\n";
    for (const auto& [pair, stats] : graph.edges)
        out << pair.first.key() << '\t' << pair.second.key() << '\t' << stats.doc_freq
            << '\t' << stats.src_freq << '\n';
}

}  // namespace tcoref

#endif  // TCOREF_CONTEXT_GRAPH_HPP
