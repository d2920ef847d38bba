#ifndef TCOREF_SEMANTIC_HPP
#define TCOREF_SEMANTIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tcoref/kb.hpp"
#include "tcoref/postfilter.hpp"
#include "tcoref/term.hpp"

namespace tcoref {

struct SemanticProfile {
    Resource resource;
    PropertyIndex properties;
    std::set<std::string> types;     // values under local name "type"
    std::set<std::string> subjects;  // values under local name "subject"
    std::set<int> years;             // standalone 4-digit integers from literal values
};

// Standalone 4-digit integers in [1000, 2999]: digit runs of exactly four,
// so dates such as 1990-05-12 contribute their year.
inline std::set<int> extract_years(std::string_view text) {
    std::set<int> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] < '0' || text[i] > '9') {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && text[j] >= '0' && text[j] <= '9') ++j;
        if (j - i == 4) {
            int v = (text[i] - '0') * 1000 + (text[i + 1] - '0') * 100 +
                    (text[i + 2] - '0') * 10 + (text[i + 3] - '0');
            if (v >= 1000 && v <= 2999) out.insert(v);
        }
        i = j;
    }
    return out;
}

inline SemanticProfile build_profile(Resource resource, PropertyIndex properties) {
    SemanticProfile profile;
    profile.resource = std::move(resource);
    if (const auto* types = properties.local("type")) {
        for (const auto& v : *types)
            if (!v.inverse) profile.types.insert(v.value);
    }
    if (const auto* subjects = properties.local("subject")) {
        for (const auto& v : *subjects)
            if (!v.inverse) profile.subjects.insert(v.value);
    }
    for (const auto& [pred, values] : properties.by_uri) {
        (void)pred;
        for (const auto& v : values) {
            if (v.kind != PropertyValue::Kind::literal || v.inverse) continue;
            auto years = extract_years(v.value);
            profile.years.insert(years.begin(), years.end());
        }
    }
    profile.properties = std::move(properties);
    return profile;
}

// Profile straight from the knowledge base, dual-indexed properties included.
inline SemanticProfile fetch_profile(const Resource& resource, const KnowledgeBase& kb) {
    return build_profile(resource, kb.properties(resource));
}

// Follows the redirect chain to its fixed point, aggregating the properties
// of every visited resource. A revisit stops the walk.
inline std::pair<Resource, PropertyIndex> follow_redirects(Resource resource,
                                                           const KnowledgeBase& kb) {
    PropertyIndex aggregated = kb.properties(resource);
    std::set<std::string> visited{resource.uri};
    while (auto next = kb.redirect_target(resource)) {
        if (!visited.insert(next->uri).second) break;
        aggregated.merge(kb.properties(*next));
        resource = *next;
    }
    return {std::move(resource), std::move(aggregated)};
}

// The disambiguation resource of `resource`, found through inverse
// disambiguates-relations, accepted only when its name is exactly the
// resource's name with " (disambiguation)" appended.
inline std::optional<Resource> find_disambiguation(const Resource& resource,
                                                   const KnowledgeBase& kb) {
    PropertyIndex index = kb.properties(resource);
    const auto* links = index.local(local_name(std::string(kDisambiguatesPredicate)));
    if (!links) return std::nullopt;
    std::string wanted = normalize_kb_name(resource.name + " (disambiguation)");
    for (const auto& v : *links) {
        if (!v.inverse || v.kind != PropertyValue::Kind::resource) continue;
        std::optional<Resource> page = kb.lookup(name_from_uri(v.value));
        Resource candidate = page ? *page : Resource{name_from_uri(v.value), v.value};
        if (normalize_kb_name(candidate.name) == wanted) return candidate;
    }
    return std::nullopt;
}

struct RankedTerm {
    Term term;
    std::int64_t freq = 0;
};

// Per-term lexical context carried into name resolution: direct and indirect
// co-references with their document frequencies.
struct CorefContext {
    std::map<Term, std::vector<RankedTerm>> direct;
    std::map<Term, std::vector<RankedTerm>> indirect;
    std::map<Term, std::int64_t> term_freq;

    std::vector<RankedTerm> direct_of(const Term& t) const {
        auto it = direct.find(t);
        return it == direct.end() ? std::vector<RankedTerm>{} : it->second;
    }
    std::vector<RankedTerm> indirect_of(const Term& t) const {
        auto it = indirect.find(t);
        return it == indirect.end() ? std::vector<RankedTerm>{} : it->second;
    }
    std::int64_t freq_of(const Term& t) const {
        auto it = term_freq.find(t);
        return it == term_freq.end() ? 0 : it->second;
    }
};

namespace semantic_detail {

// Longer terms first, then less frequent first; more expressive probes win.
inline void rank_for_resolution(std::vector<RankedTerm>& terms) {
    std::stable_sort(terms.begin(), terms.end(), [](const RankedTerm& a, const RankedTerm& b) {
        if (a.term.size() != b.term.size()) return a.term.size() > b.term.size();
        if (a.freq != b.freq) return a.freq < b.freq;
        return a.term < b.term;
    });
}

inline std::optional<Term> term_from_name(const std::string& name) {
    std::string spaced = name;
    for (char& c : spaced)
        if (c == '_') c = ' ';
    if (word_tokens(spaced).size() > 4 || word_tokens(spaced).empty()) return std::nullopt;
    static const Stopwords kNone;
    return normalize_term(spaced, kNone);
}

// Occurrences of a term's token sequence across a resource's property values:
// literal text plus the local names of resource-valued properties.
inline std::int64_t occurrence_count(const Term& term, const PropertyIndex& index) {
    std::int64_t count = 0;
    for (const auto& [pred, values] : index.by_uri) {
        (void)pred;
        for (const auto& v : values) {
            std::string text = v.kind == PropertyValue::Kind::literal
                                   ? v.value
                                   : name_from_uri(v.value);
            auto tokens = normalized_tokens(text);
            if (tokens.size() < term.tokens.size()) continue;
            for (std::size_t i = 0; i + term.tokens.size() <= tokens.size(); ++i) {
                if (std::equal(term.tokens.begin(), term.tokens.end(), tokens.begin() + i))
                    ++count;
            }
        }
    }
    return count;
}

}  // namespace semantic_detail

// Name resolving: the term itself first, then its direct co-references by
// descending length and ascending frequency; the first knowledge-base hit wins.
inline std::optional<Resource> resolve(const Term& term, std::vector<RankedTerm> direct,
                                       const KnowledgeBase& kb) {
    if (auto hit = kb.lookup(term.surface)) return hit;
    semantic_detail::rank_for_resolution(direct);
    for (const auto& d : direct) {
        if (d.term == term) continue;
        if (auto hit = kb.lookup(d.term.surface)) return hit;
    }
    return std::nullopt;
}

// Direct disambiguation: a candidate whose name is one of the term's direct
// co-references. Multiple matches resolve by descending length and ascending
// frequency.
inline std::optional<Resource> disambiguate_direct(const std::vector<Resource>& candidates,
                                                   const std::vector<RankedTerm>& direct) {
    std::map<Term, std::int64_t> wanted;
    for (const auto& d : direct) wanted.emplace(d.term, d.freq);

    struct Match {
        Resource resource;
        RankedTerm ranked;
    };
    std::vector<Match> matches;
    for (const auto& c : candidates) {
        auto as_term = semantic_detail::term_from_name(c.name);
        if (!as_term) continue;
        auto it = wanted.find(*as_term);
        if (it == wanted.end()) continue;
        matches.push_back(Match{c, RankedTerm{it->first, it->second}});
    }
    if (matches.empty()) return std::nullopt;
    std::stable_sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
        if (a.ranked.term.size() != b.ranked.term.size())
            return a.ranked.term.size() > b.ranked.term.size();
        if (a.ranked.freq != b.ranked.freq) return a.ranked.freq < b.ranked.freq;
        return a.resource.name < b.resource.name;
    });
    return matches.front().resource;
}

// Indirect disambiguation: cosine similarity between the frequency vector of
// the indirect co-references and each candidate's occurrence vector over its
// property values. With no indirect co-references the first candidate is
// taken and flagged low-confidence.
inline Resource disambiguate_indirect(const std::vector<Resource>& candidates,
                                      const std::vector<RankedTerm>& indirect,
                                      const KnowledgeBase& kb,
                                      bool* low_confidence = nullptr) {
    if (candidates.empty()) throw std::invalid_argument("no disambiguation candidates");
    if (low_confidence) *low_confidence = false;
    if (indirect.empty()) {
        if (low_confidence) *low_confidence = true;
        return candidates.front();
    }

    double ind_norm_sq = 0.0;
    for (const auto& r : indirect)
        ind_norm_sq += static_cast<double>(r.freq) * static_cast<double>(r.freq);
    double ind_norm = std::sqrt(ind_norm_sq);

    std::size_t best = 0;
    double best_cos = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        PropertyIndex index = kb.properties(candidates[i]);
        double dot = 0.0, cand_norm_sq = 0.0;
        for (const auto& r : indirect) {
            double occur =
                static_cast<double>(semantic_detail::occurrence_count(r.term, index));
            dot += static_cast<double>(r.freq) * occur;
            cand_norm_sq += occur * occur;
        }
        double cos = 0.0;
        if (cand_norm_sq > 0.0 && ind_norm > 0.0)
            cos = dot / (ind_norm * std::sqrt(cand_norm_sq));
        if (cos > best_cos) {
            best_cos = cos;
            best = i;
        }
    }
    return candidates[best];
}

// Whether two profiles are compatible on the directly annotated dimensions.
// Open world: a dimension applies only when both sides carry it; when both
// have years, years are compared instead of subjects. Kept when any applicable
// dimension overlaps, or none applies.
inline bool similarity_filter(const SemanticProfile& q, const SemanticProfile& c) {
    bool any_applicable = false;
    if (!q.types.empty() && !c.types.empty()) {
        any_applicable = true;
        for (const auto& t : q.types)
            if (c.types.count(t)) return true;
    }
    if (!q.years.empty() && !c.years.empty()) {
        any_applicable = true;
        for (int y : q.years)
            if (c.years.count(y)) return true;
    } else if (!q.subjects.empty() && !c.subjects.empty()) {
        any_applicable = true;
        for (const auto& s : q.subjects)
            if (c.subjects.count(s)) return true;
    }
    return !any_applicable;
}

// The type and its super-types up to the root; cycle-safe; an unknown type is
// its own chain.
inline std::vector<std::string> type_chain(const std::string& type_uri,
                                           const KnowledgeBase& kb) {
    std::vector<std::string> chain{type_uri};
    std::set<std::string> visited{type_uri};
    std::string current = type_uri;
    while (auto super = kb.super_type(current)) {
        if (!visited.insert(*super).second) break;
        chain.push_back(*super);
        current = *super;
    }
    return chain;
}

// Compares type chains below their deepest common ancestor: when both sides
// continue with different child types the profiles refer to different kinds
// of entities; when either side has no further sub-type the open world
// assumption keeps the candidate.
inline bool type_hierarchy_filter(const SemanticProfile& q, const SemanticProfile& c,
                                  const KnowledgeBase& kb) {
    if (q.types.empty() || c.types.empty()) return true;

    auto chains_of = [&](const std::set<std::string>& types) {
        std::vector<std::vector<std::string>> chains;
        for (const auto& t : types) {
            auto chain = type_chain(t, kb);
            std::reverse(chain.begin(), chain.end());  // root first
            chains.push_back(std::move(chain));
        }
        return chains;
    };
    auto q_chains = chains_of(q.types);
    auto c_chains = chains_of(c.types);

    for (const auto& qc : q_chains) {
        for (const auto& cc : c_chains) {
            if (qc.front() != cc.front()) continue;  // no common ancestor
            std::size_t i = 0;
            while (i < qc.size() && i < cc.size() && qc[i] == cc[i]) ++i;
            if (i < qc.size() && i < cc.size()) return false;  // both defined, different
        }
    }
    return true;
}

struct ResolvedEntity {
    SemanticProfile profile;
    bool low_confidence = false;
};

// Full resolution chain for a term: name resolving, recursive redirects with
// property aggregation, then the disambiguation strategies (redirected
// disambiguation pages, inverse-linked "(disambiguation)" pages, direct
// co-reference match, cosine similarity over indirect co-references).
inline std::optional<ResolvedEntity> resolve_entity(const Term& term,
                                                    const CorefContext& ctx,
                                                    const KnowledgeBase& kb) {
    auto initial = resolve(term, ctx.direct_of(term), kb);
    if (!initial) return std::nullopt;

    auto [resource, properties] = follow_redirects(*initial, kb);

    ResolvedEntity out;
    std::vector<Resource> candidates = kb.disambiguation_candidates(resource);
    if (candidates.empty()) {
        if (auto page = find_disambiguation(resource, kb)) {
            candidates = kb.disambiguation_candidates(*page);
            // Only the disambiguation resource's properties survive; the
            // initially resolved resource may not be the entity of interest.
            properties = kb.properties(*page);
            resource = *page;
        }
    }
    if (!candidates.empty()) {
        std::optional<Resource> chosen = disambiguate_direct(candidates, ctx.direct_of(term));
        if (!chosen)
            chosen = disambiguate_indirect(candidates, ctx.indirect_of(term), kb,
                                           &out.low_confidence);
        auto [final_resource, final_properties] = follow_redirects(*chosen, kb);
        properties.merge(final_properties);
        resource = final_resource;
    }

    out.profile = build_profile(std::move(resource), std::move(properties));
    return out;
}

struct SemanticFilterResult {
    std::set<Candidate> kept;
    bool query_resolved = false;
    std::vector<std::string> warnings;
    std::map<Term, std::string> resolutions;  // resolved resource per term
};

// Knowledge-base filtering of co-reference candidates. An unresolvable query
// disables the filter entirely; unresolvable candidates are kept (they are
// not semantically comparable); a candidate resolving to the query's own
// resource is kept; the rest must pass the similarity filter and the type
// hierarchy filter. Candidates are adjudicated independently of each other.
inline SemanticFilterResult semantic_filter_detailed(const Term& q,
                                                     const std::set<Candidate>& candidates,
                                                     const CorefContext& ctx,
                                                     const KnowledgeBase& kb) {
    SemanticFilterResult result;
    auto resolved_q = resolve_entity(q, ctx, kb);
    if (!resolved_q) {
        result.kept = candidates;
        return result;
    }
    result.query_resolved = true;
    result.resolutions[q] = resolved_q->profile.resource.uri;

    for (const auto& candidate : candidates) {
        std::optional<ResolvedEntity> resolved;
        try {
            resolved = resolve_entity(candidate.term, ctx, kb);
        } catch (const KbError& e) {
            result.warnings.push_back("KB failure for '" + candidate.term.surface +
                                      "', kept: " + e.what());
            result.kept.insert(candidate);
            continue;
        }
        if (!resolved) {
            result.kept.insert(candidate);
            continue;
        }
        result.resolutions[candidate.term] = resolved->profile.resource.uri;
        if (resolved->profile.resource.uri == resolved_q->profile.resource.uri) {
            result.kept.insert(candidate);
            continue;
        }
        if (!similarity_filter(resolved_q->profile, resolved->profile)) continue;
        if (!type_hierarchy_filter(resolved_q->profile, resolved->profile, kb)) continue;
        result.kept.insert(candidate);
    }
    return result;
}

inline std::set<Candidate> semantic_filter(const Term& q, const std::set<Candidate>& candidates,
                                           const CorefContext& ctx, const KnowledgeBase& kb) {
    return semantic_filter_detailed(q, candidates, ctx, kb).kept;
}

}  // namespace tcoref

#endif  // TCOREF_SEMANTIC_HPP
