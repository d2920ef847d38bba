#include <catch2/catch_amalgamated.hpp>

#include "tcoref/context_graph.hpp"
#include "tcoref/stopwords.hpp"

#include "support/oracles.hpp"

using namespace tcoref;

namespace {

const Stopwords& stop() {
    static Stopwords s = load_wordlist(tcoref::testing::data_path("stopwords_en.txt"));
    return s;
}

Term T(const std::string& s) { return normalize_term(s, stop()); }

std::vector<const Document*> ptrs(const std::vector<Document>& docs) {
    std::vector<const Document*> out;
    for (const auto& d : docs) out.push_back(&d);
    return out;
}

}  // namespace

TEST_CASE("graph aggregates nodes and edges from one document") {
    std::vector<Document> docs{
        {"d1", "Kinect impressed Microsoft", {{2010, 6, 1}, 0}, "blogA"}};
    ContextGraph g = build_context_graph(ptrs(docs), 10, stop());
    REQUIRE(g.nodes.size() == 2);
    CHECK(g.nodes.at(T("Kinect")).doc_freq == 1);
    CHECK(g.nodes.at(T("Kinect")).src_freq == 1);
    REQUIRE(g.edges.size() == 1);
    const EdgeStats* e = g.edge(T("Kinect"), T("Microsoft"));
    REQUIRE(e);
    CHECK(e->doc_freq == 1);
    CHECK(e->src_freq == 1);
}

TEST_CASE("edge frequencies count documents and distinct sources") {
    std::vector<Document> docs{
        {"d1", "Kinect impressed Microsoft", {{2010, 6, 1}, 0}, "blogA"},
        {"d2", "Kinect amazed Microsoft", {{2010, 6, 2}, 0}, "blogA"},
        {"d3", "Kinect and Microsoft again", {{2010, 6, 3}, 0}, "blogB"},
    };
    ContextGraph g = build_context_graph(ptrs(docs), 10, stop());
    const EdgeStats* e = g.edge(T("Kinect"), T("Microsoft"));
    REQUIRE(e);
    CHECK(e->doc_freq == 3);
    CHECK(e->src_freq == 2);
    CHECK(g.nodes.at(T("Kinect")).doc_freq == 3);
    CHECK(g.nodes.at(T("Kinect")).src_freq == 2);
    CHECK(g.source_count == 2);
}

TEST_CASE("a term without neighbors in the window stays an isolated node") {
    std::string gap;
    for (int i = 0; i < 12; ++i) gap += "filler ";
    std::vector<Document> docs{
        {"d1", "Kinect " + gap + "Microsoft", {{2010, 6, 1}, 0}, "blogA"},
        {"d2", "Kinect alone here", {{2010, 6, 2}, 0}, "blogA"},
    };
    ContextGraph g = build_context_graph(ptrs(docs), 10, stop());
    CHECK(g.nodes.at(T("Kinect")).doc_freq == 2);
    CHECK(g.edges.empty());
}

TEST_CASE("node surface is the most frequent spelling") {
    std::vector<Document> docs{
        {"d1", "KINECT arrived", {{2010, 6, 1}, 0}, "blogA"},
        {"d2", "Kinect arrived", {{2010, 6, 2}, 0}, "blogA"},
        {"d3", "Kinect arrived", {{2010, 6, 3}, 0}, "blogB"},
    };
    ContextGraph g = build_context_graph(ptrs(docs), 10, stop());
    auto it = g.nodes.find(T("Kinect"));
    REQUIRE(it != g.nodes.end());
    CHECK(it->first.surface == "Kinect");
}

namespace {

ContextGraph schedule_fixture() {
    ContextGraph g;
    g.source_count = 1;
    auto add = [&](const std::string& name, std::int64_t df) {
        g.nodes[T(name)] = NodeStats{df, 1};
    };
    add("Alpha", 3);  // query sub-term
    add("Beta", 7);   // query sub-term
    for (int i : {1, 2, 4, 5, 6, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20}) {
        char name[16];
        std::snprintf(name, sizeof(name), "Node%02d", i);
        add(name, i);
    }
    auto edge = [&](const std::string& a, const std::string& b) {
        g.edges[make_term_pair(T(a), T(b))] = EdgeStats{1, 1};
    };
    edge("Node20", "Node19");
    edge("Node20", "Alpha");
    edge("Node01", "Node02");
    edge("Node16", "Node15");
    return g;
}

}  // namespace

TEST_CASE("a-priori filter follows the hand-simulated schedule") {
    // Thresholds start at 5.2 * min(df(Alpha), df(Beta)) = 15.6 documents, one
    // source; the five highest-frequency nodes qualify immediately and the
    // query sub-terms are exempt, so the loop stops in its first step.
    ContextGraph g = schedule_fixture();
    AprioriParams params;
    params.start_fraction = 5.2;
    params.src_fraction = 1.0;
    params.rel_src_fraction = 3.0;
    params.decay = 0.5;
    params.target_terms = 5;

    ContextGraph out = apriori_filter(g, T("Alpha Beta"), params);

    std::set<std::string> kept;
    for (const auto& [term, stats] : out.nodes) {
        (void)stats;
        kept.insert(term.surface);
    }
    CHECK(kept == std::set<std::string>{"Alpha", "Beta", "Node16", "Node17", "Node18",
                                        "Node19", "Node20"});
    CHECK(out.edges.size() == 2);
    CHECK(out.edge(T("Node20"), T("Node19")));
    CHECK(out.edge(T("Node20"), T("Alpha")));
}

TEST_CASE("a-priori filter is a no-op when thresholds start below all frequencies") {
    ContextGraph g = schedule_fixture();
    AprioriParams params;
    params.start_fraction = 0.1;
    params.src_fraction = 0.1;
    params.rel_src_fraction = 0.05;
    params.target_terms = 50;

    ContextGraph out = apriori_filter(g, T("Alpha Beta"), params);
    CHECK(out.nodes == g.nodes);
    CHECK(out.edges.size() == g.edges.size());
}

TEST_CASE("query sub-terms survive even with target one and harsh thresholds") {
    ContextGraph g = schedule_fixture();
    AprioriParams params;
    params.start_fraction = 100.0;
    params.src_fraction = 50.0;
    params.rel_src_fraction = 50.0;
    params.target_terms = 1;

    ContextGraph out = apriori_filter(g, T("Alpha Beta"), params);
    CHECK(out.has_node(T("Alpha")));
    CHECK(out.has_node(T("Beta")));
}

TEST_CASE("a frequent relation keeps its endpoints alive") {
    ContextGraph g = schedule_fixture();
    g.edges[make_term_pair(T("Node01"), T("Node02"))] = EdgeStats{4, 9};
    AprioriParams params;
    params.start_fraction = 100.0;
    params.src_fraction = 50.0;
    params.rel_src_fraction = 2.0;  // threshold 2 sources, relation has 9
    params.target_terms = 50;
    params.floor = 2.0;

    ContextGraph out = apriori_filter(g, T("Alpha Beta"), params);
    CHECK(out.has_node(T("Node01")));
    CHECK(out.has_node(T("Node02")));
    CHECK(out.edge(T("Node01"), T("Node02")));
}

TEST_CASE("a-priori output is a stats-preserving subgraph") {
    tcoref::testing::RandomCorpusBuilder gen(77);
    Corpus corpus = gen.make_corpus(50, 4);
    ContextGraph g = build_context_graph(ptrs(corpus.documents), 10, stop());
    Term q = T("Chancellor Alten Kestrel");
    AprioriParams params;
    params.target_terms = 10;
    ContextGraph out = apriori_filter(g, q, params);

    for (const auto& [term, stats] : out.nodes) {
        REQUIRE(g.nodes.count(term) == 1);
        CHECK(g.nodes.at(term).doc_freq == stats.doc_freq);
        CHECK(g.nodes.at(term).src_freq == stats.src_freq);
    }
    for (const auto& [pair, stats] : out.edges) {
        CHECK(out.nodes.count(pair.first) == 1);
        CHECK(out.nodes.count(pair.second) == 1);
        REQUIRE(g.edges.count(pair) == 1);
        CHECK(g.edges.at(pair).doc_freq == stats.doc_freq);
    }
}

TEST_CASE("a-priori filter reports an absent query") {
    ContextGraph g = schedule_fixture();
    CHECK_THROWS_WITH(apriori_filter(g, T("Zorbulon Prime"), AprioriParams{}),
                      Catch::Matchers::ContainsSubstring("query absent"));
}

TEST_CASE("node and edge invariants hold on built graphs") {
    tcoref::testing::RandomCorpusBuilder gen(13);
    Corpus corpus = gen.make_corpus(60, 5);
    ContextGraph g = build_context_graph(ptrs(corpus.documents), 10, stop());
    for (const auto& [term, stats] : g.nodes) {
        (void)term;
        CHECK(stats.doc_freq >= 1);
        CHECK(stats.src_freq >= 1);
        CHECK(stats.src_freq <= stats.doc_freq);
    }
    for (const auto& [pair, stats] : g.edges) {
        CHECK(g.nodes.count(pair.first) == 1);
        CHECK(g.nodes.count(pair.second) == 1);
        CHECK(stats.src_freq <= stats.doc_freq);
        CHECK(stats.doc_freq <= std::min(g.nodes.at(pair.first).doc_freq,
                                         g.nodes.at(pair.second).doc_freq));
    }
}
