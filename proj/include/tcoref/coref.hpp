#ifndef TCOREF_COREF_HPP
#define TCOREF_COREF_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcoref/context_graph.hpp"
#include "tcoref/kb.hpp"
#include "tcoref/term.hpp"

namespace tcoref {

// A term together with all of its sub-terms present in the context. The
// representative is the longest term, a super-term of every member; the
// consolidated frequencies are sums over representative and members.
struct SubtermClass {
    Term representative;
    std::set<Term> members;
    std::int64_t doc_freq = 0;
    std::int64_t src_freq = 0;

    std::set<Term> all() const {
        std::set<Term> out = members;
        out.insert(representative);
        return out;
    }
};

struct ClassOptions {
    // The soft sub-term rule (token containment regardless of word order)
    // only merges terms of similar frequency; the ratio gate is skipped when
    // either frequency is unknown. Ordered containment merges unconditionally.
    double soft_freq_ratio_lo = 0.5;
    double soft_freq_ratio_hi = 2.0;
};

namespace coref_detail {

inline bool class_member(const Term& representative, const Term& candidate,
                         std::int64_t rep_freq, std::int64_t cand_freq,
                         const ClassOptions& opts) {
    if (candidate == representative) return false;
    if (candidate.size() > representative.size()) return false;
    if (is_ordered_sub_term(representative, candidate)) return true;
    if (!is_super_term(representative, candidate)) return false;
    if (rep_freq <= 0 || cand_freq <= 0) return true;
    double ratio = static_cast<double>(cand_freq) / static_cast<double>(rep_freq);
    return ratio >= opts.soft_freq_ratio_lo && ratio <= opts.soft_freq_ratio_hi;
}

}  // namespace coref_detail

// One class per term: members are all other terms of the set whose tokens are
// contained in the representative's. The prefix/suffix rule is deliberately
// not applied, so terms sharing only a prefix stay in distinct classes.
inline std::map<Term, SubtermClass> compute_subterm_classes(
    const std::map<Term, NodeStats>& terms, const ClassOptions& opts = {}) {
    std::map<Term, SubtermClass> out;
    for (const auto& [rep, rep_stats] : terms) {
        SubtermClass cls;
        cls.representative = rep;
        cls.doc_freq = rep_stats.doc_freq;
        cls.src_freq = rep_stats.src_freq;
        for (const auto& [cand, cand_stats] : terms) {
            if (!coref_detail::class_member(rep, cand, rep_stats.doc_freq,
                                            cand_stats.doc_freq, opts))
                continue;
            cls.members.insert(cand);
            cls.doc_freq += cand_stats.doc_freq;
            cls.src_freq += cand_stats.src_freq;
        }
        out.emplace(rep, std::move(cls));
    }
    return out;
}

inline std::map<Term, SubtermClass> compute_subterm_classes(const std::set<Term>& terms,
                                                            const ClassOptions& opts = {}) {
    std::map<Term, NodeStats> with_stats;
    for (const auto& t : terms) with_stats.emplace(t, NodeStats{});
    return compute_subterm_classes(with_stats, opts);
}

inline std::map<Term, SubtermClass> compute_subterm_classes(const ContextGraph& graph,
                                                            const ClassOptions& opts = {}) {
    return compute_subterm_classes(graph.nodes, opts);
}

// Sub-term classes as graph nodes; an edge exists between two classes when any
// pair of their terms co-occurred, with the underlying edge weights summed
// (each term-level edge counted once per class pair).
struct ClassGraph {
    std::map<Term, SubtermClass> classes;  // keyed by representative
    std::map<TermPair, EdgeStats> edges;   // unordered representative pairs

    const SubtermClass* find(const Term& w) const {
        auto it = classes.find(w);
        return it == classes.end() ? nullptr : &it->second;
    }

    std::vector<Term> related(const Term& representative) const {
        std::vector<Term> out;
        for (const auto& [pair, stats] : edges) {
            (void)stats;
            if (pair.first == representative) out.push_back(pair.second);
            else if (pair.second == representative) out.push_back(pair.first);
        }
        return out;
    }

    const EdgeStats* edge(const Term& a, const Term& b) const {
        auto it = edges.find(make_term_pair(a, b));
        return it == edges.end() ? nullptr : &it->second;
    }
};

inline ClassGraph consolidate(const ContextGraph& graph,
                              const std::map<Term, SubtermClass>& classes) {
    ClassGraph out;
    out.classes = classes;

    std::map<Term, std::vector<const Term*>> containing;  // term -> representatives
    for (const auto& [rep, cls] : classes) {
        containing[rep].push_back(&cls.representative);
        for (const auto& m : cls.members) containing[m].push_back(&cls.representative);
    }

    std::map<TermPair, std::set<TermPair>> counted;
    for (const auto& [pair, stats] : graph.edges) {
        auto it1 = containing.find(pair.first);
        auto it2 = containing.find(pair.second);
        if (it1 == containing.end() || it2 == containing.end()) continue;
        for (const Term* rep1 : it1->second) {
            for (const Term* rep2 : it2->second) {
                if (*rep1 == *rep2) continue;
                TermPair class_key = make_term_pair(*rep1, *rep2);
                if (!counted[class_key].insert(pair).second) continue;
                auto& acc = out.edges[class_key];
                acc.doc_freq += stats.doc_freq;
                acc.src_freq += stats.src_freq;
            }
        }
    }
    return out;
}

// Direct co-references: every term sharing a sub-term class with w, i.e. the
// union of the classes of w's super-terms, minus w itself.
inline std::set<Term> direct_corefs(const Term& w,
                                    const std::map<Term, SubtermClass>& classes) {
    if (!classes.count(w))
        throw std::invalid_argument("unknown term: '" + w.key() + "'");
    std::set<Term> out;
    for (const auto& [rep, cls] : classes) {
        (void)rep;
        auto everything = cls.all();
        if (!everything.count(w)) continue;
        out.insert(everything.begin(), everything.end());
    }
    out.erase(w);
    return out;
}

// All co-reference candidates of w: the representatives of the classes
// connected to w's own class.
inline std::set<Term> corefs(const Term& w, const ClassGraph& cg) {
    if (!cg.classes.count(w))
        throw std::invalid_argument("unknown term: '" + w.key() + "'");
    std::set<Term> out;
    for (const auto& rep : cg.related(w)) out.insert(rep);
    return out;
}

inline std::set<Term> indirect_corefs(const Term& w, const ClassGraph& cg,
                                      const std::map<Term, SubtermClass>& classes) {
    std::set<Term> all = corefs(w, cg);
    for (const auto& d : direct_corefs(w, classes)) all.erase(d);
    return all;
}

// A term minted by the prolong rule, together with the overlapping pair it
// came from and the prefix/suffix split whose co-occurrence evidenced it.
struct ProlongedTerm {
    Term term;
    Term left;
    Term right;
    Term split_prefix;
    Term split_suffix;
};

// Merges lexically overlapping term pairs into a longer term when the merged
// term splits into a prefix and suffix with a co-occurrence edge, and the
// knowledge base resolves the merged name. Terms longer than four tokens are
// never created. Single pass; merged terms are not merged again.
inline std::vector<ProlongedTerm> prolong(const ContextGraph& graph,
                                          const KnowledgeBase& kb) {
    std::vector<const Term*> terms;
    for (const auto& [term, stats] : graph.nodes) {
        (void)stats;
        terms.push_back(&term);
    }

    auto bare = [](std::vector<std::string> tokens) {
        Term t;
        t.tokens = std::move(tokens);
        return t;
    };

    std::map<Term, ProlongedTerm> out;
    for (const Term* a : terms) {
        for (const Term* b : terms) {
            if (a == b) continue;
            std::size_t max_overlap = std::min(a->size(), b->size()) - 1;
            for (std::size_t o = 1; o <= max_overlap; ++o) {
                bool match = true;
                for (std::size_t i = 0; i < o && match; ++i)
                    match = a->tokens[a->size() - o + i] == b->tokens[i];
                if (!match) continue;

                Term merged = concat_terms(*a, *b, o);
                if (merged.size() > 4) continue;
                if (graph.has_node(merged) || out.count(merged)) continue;

                std::optional<std::pair<Term, Term>> split;
                for (std::size_t s = 1; s < merged.size() && !split; ++s) {
                    Term prefix = bare({merged.tokens.begin(), merged.tokens.begin() + s});
                    Term suffix = bare({merged.tokens.begin() + s, merged.tokens.end()});
                    if (graph.has_node(prefix) && graph.has_node(suffix) &&
                        graph.edge(prefix, suffix))
                        split = {prefix, suffix};
                }
                if (!split) continue;
                if (!kb.lookup(merged.surface)) continue;

                ProlongedTerm p{merged, *a, *b, split->first, split->second};
                out.emplace(std::move(merged), std::move(p));
            }
        }
    }
    std::vector<ProlongedTerm> result;
    for (auto& [key, p] : out) {
        (void)key;
        result.push_back(std::move(p));
    }
    return result;
}

// Adds prolonged terms to the graph. The new node takes the frequencies of
// the prefix/suffix relation that evidenced it and inherits the co-occurrence
// relations of its two constituents.
inline void install_prolonged(ContextGraph& graph, const std::vector<ProlongedTerm>& terms) {
    for (const auto& p : terms) {
        const EdgeStats* evidence = graph.edge(p.split_prefix, p.split_suffix);
        if (!evidence) continue;
        graph.nodes[p.term] = NodeStats{evidence->doc_freq, evidence->src_freq};

        std::map<Term, EdgeStats> inherited;
        for (const Term* constituent : {&p.left, &p.right}) {
            for (const auto& [pair, stats] : graph.edges) {
                const Term* other = nullptr;
                if (pair.first == *constituent) other = &pair.second;
                else if (pair.second == *constituent) other = &pair.first;
                if (!other || *other == p.term) continue;
                auto& acc = inherited[*other];
                acc.doc_freq += stats.doc_freq;
                acc.src_freq += stats.src_freq;
            }
        }
        for (const auto& [other, stats] : inherited) {
            auto& slot = graph.edges[make_term_pair(p.term, other)];
            slot.doc_freq += stats.doc_freq;
            slot.src_freq += stats.src_freq;
        }
    }
}

// Display form used by the class dumps: "Representative [member, member]".
inline void dump_classes(const std::map<Term, SubtermClass>& classes, std::ostream& out) {
    for (const auto& [rep, cls] : classes) {
        out << rep.surface << " [";
        bool first = true;
        for (const auto& m : cls.members) {
            if (!first) out << ", ";
            out << m.surface;
            first = false;
        }
        out << "]\n";
    }
}

}  // namespace tcoref

#endif  // TCOREF_COREF_HPP
