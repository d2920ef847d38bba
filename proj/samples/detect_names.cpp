// Minimal walkthrough: load the bundled corpus, detect co-reference
// candidates for one query, and print what each filtering stage keeps.
//
//   ./detect_names [corpus.tsv testset-ignored stopwords.txt kb_snapshot.json]
//
// Defaults assume the repository layout when run from the build directory.

#include <cstdio>
#include <string>

#include "tcoref/tcoref.hpp"

int main(int argc, char** argv) {
    std::string corpus_path = argc > 1 ? argv[1] : "../tests/fixtures/corpus_synthetic.tsv";
    std::string stopwords_path = argc > 2 ? argv[2] : "../data/stopwords_en.txt";
    std::string snapshot_path = argc > 3 ? argv[3] : "../tests/fixtures/kb_snapshot.json";

    using namespace tcoref;
    try {
        Stopwords stopwords = load_wordlist(stopwords_path);
        Corpus corpus = ingest_corpus(corpus_path).corpus;
        SnapshotKb kb = SnapshotKb::from_file(snapshot_path);

        Term query = normalize_term("Sean Combs", stopwords);
        ChangePeriod period = year_period(2005, 2005);

        PipelineConfig cfg;
        cfg.window = 10;
        DetectedCell cell = detect_cell(corpus, query, period, stopwords, cfg, &kb);
        if (cell.query_absent) {
            std::puts("query absent in the period");
            return 1;
        }

        std::printf("sources kept: %zu, narrowed period: %s\n", cell.retained_sources,
                    cell.narrowed.str().c_str());
        std::printf("unfiltered candidates (%zu):\n", cell.unfiltered.size());
        for (const auto& c : cell.unfiltered)
            std::printf("  %-24s df=%lld sf=%lld\n", c.term.surface.c_str(),
                        static_cast<long long>(c.df), static_cast<long long>(c.sf));

        auto frequency = aposteriori_filter(cell.unfiltered, cfg.postfilter);
        std::printf("after frequency filtering (%zu):\n", frequency.size());
        for (const auto& c : frequency) std::printf("  %s\n", c.term.surface.c_str());

        auto semantic = semantic_filter(query, frequency, cell.context, kb);
        std::printf("after semantic filtering (%zu):\n", semantic.size());
        for (const auto& c : semantic) std::printf("  %s\n", c.term.surface.c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
