// Command line front end for the temporal co-reference toolkit. Subcommands
// mirror the batch pipeline: ingest, detect, filter, evaluate, sweep, and run
// (the whole chain). Exit codes: 0 success, 1 partial per-query failures,
// 2 configuration errors.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tcoref/tcoref.hpp"

namespace {

struct CliState {
    tcoref::PipelineConfig cfg;
    bool no_frequency = false;
    bool no_semantic = false;
};

void add_common_options(CLI::App* cmd, CliState& state) {
    auto& cfg = state.cfg;
    cmd->add_option("--corpus", cfg.corpus_path, "Corpus file (line-delimited records)");
    cmd->add_option("--testset", cfg.testset_path, "Test set file");
    cmd->add_option("--stopwords", cfg.stopwords_path, "Stopword list")
        ->capture_default_str();
    cmd->add_option("--out", cfg.output_dir, "Output directory")->capture_default_str();
    cmd->add_option("--kb-snapshot", cfg.kb_snapshot, "Offline KB snapshot (JSON)");
    cmd->add_option("--kb-endpoint", cfg.kb_endpoint, "Live SPARQL endpoint URL");
    cmd->add_option("--kb-cache", cfg.kb_cache_dir, "Response cache dir for the live KB");
    cmd->add_option("--cache", cfg.extraction_cache, "Extraction cache file");
    cmd->add_option("--window", cfg.window, "Co-occurrence window in tokens")
        ->capture_default_str();
    cmd->add_option("--target-terms", cfg.apriori.target_terms,
                    "A-priori filter: node count to aim for")
        ->capture_default_str();
    cmd->add_option("--decay", cfg.apriori.decay, "A-priori filter: threshold decay")
        ->capture_default_str();
    cmd->add_option("--start-fraction", cfg.apriori.start_fraction,
                    "A-priori filter: document threshold start fraction")
        ->capture_default_str();
    cmd->add_option("--src-fraction", cfg.apriori.src_fraction,
                    "A-priori filter: source threshold start fraction")
        ->capture_default_str();
    cmd->add_option("--rel-src-fraction", cfg.apriori.rel_src_fraction,
                    "A-priori filter: relation source threshold start fraction")
        ->capture_default_str();
    cmd->add_option("--floor", cfg.apriori.floor, "A-priori filter: threshold floor")
        ->capture_default_str();
    cmd->add_option("--k", cfg.postfilter.frequency_factor_k,
                    "A-posteriori frequency factor in [0,1]")
        ->capture_default_str();
    cmd->add_option("--l", cfg.postfilter.weight_factor_l,
                    "A-posteriori weight factor in [0,1]")
        ->capture_default_str();
    cmd->add_flag_callback(
        "--filter-mode-formula",
        [&cfg] { cfg.postfilter.mode = tcoref::PostFilterParams::Mode::formula; },
        "Use the set-builder reading of the a-posteriori filter");
    cmd->add_flag("--english-gate", cfg.english_gate,
                  "Drop non-English documents at ingestion");
    cmd->add_flag("--no-frequency-filter", state.no_frequency,
                  "Disable the a-posteriori frequency stage");
    cmd->add_flag("--no-semantic-filter", state.no_semantic,
                  "Disable the semantic stage");
    cmd->add_option("--sweep-step", cfg.sweep_step, "Grid resolution for sweep")
        ->capture_default_str();
}

void apply_toggles(CliState& state) {
    if (state.no_frequency) state.cfg.frequency_stage = false;
    if (state.no_semantic) state.cfg.semantic_stage = false;
}

int report_failures(const std::vector<std::string>& failures) {
    for (const auto& f : failures) std::cerr << "failed: " << f << "\n";
    return failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CliState state;

    // --config is handled before regular parsing so that flags override file
    // values.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                state.cfg = tcoref::load_config_file(argv[i + 1]);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
            }
        }
    }

    CLI::App app{"Temporal co-reference detection over multi-source blog corpora"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "Key=value configuration file")
        ->expected(1);

    auto* ingest = app.add_subcommand(
        "ingest", "Validate a corpus dump and write the canonical store");
    std::string ingest_input;
    ingest->add_option("--input", ingest_input, "Raw corpus file")->required();
    add_common_options(ingest, state);

    auto* detect = app.add_subcommand(
        "detect", "Derive co-reference candidates per query and change period");
    add_common_options(detect, state);

    auto* filter = app.add_subcommand(
        "filter", "Apply frequency and semantic filters to detected candidates");
    add_common_options(filter, state);

    auto* evaluate = app.add_subcommand("evaluate", "Compute metrics from filtered results");
    add_common_options(evaluate, state);

    auto* sweep = app.add_subcommand("sweep", "Grid-search the (k, l) filter parameters");
    add_common_options(sweep, state);

    auto* run = app.add_subcommand("run", "Full pipeline: detect, filter, evaluate");
    add_common_options(run, state);

    CLI11_PARSE(app, argc, argv);
    apply_toggles(state);

    try {
        if (ingest->parsed()) {
            tcoref::Stopwords stopwords;
            const tcoref::Stopwords* gate = nullptr;
            if (state.cfg.english_gate) {
                stopwords = tcoref::load_wordlist(state.cfg.stopwords_path);
                gate = &stopwords;
            }
            tcoref::IngestResult result =
                tcoref::ingest_corpus(ingest_input, tcoref::CorpusFormat::lines, gate);
            std::filesystem::create_directories(state.cfg.output_dir);
            std::string store = state.cfg.output_dir + "/corpus.tsv";
            tcoref::write_corpus(result.corpus, store);
            std::printf("documents: %zu\nsources: %zu\nskipped: %zu\nnon_english: %zu\n",
                        result.corpus.documents.size(), result.corpus.sources.size(),
                        result.skipped_records, result.rejected_non_english);
            std::printf("store: %s\n", store.c_str());
            return 0;
        }
        if (detect->parsed()) return report_failures(tcoref::run_detect(state.cfg));
        if (filter->parsed()) return report_failures(tcoref::run_filter(state.cfg));
        if (evaluate->parsed()) {
            tcoref::PipelineResult result = tcoref::run_evaluate(state.cfg);
            std::cout << result.report_text;
            return result.failures.empty() ? 0 : 1;
        }
        if (sweep->parsed()) {
            tcoref::SweepResult result = tcoref::run_sweep(state.cfg);
            std::printf("best k=%.2f l=%.2f\ngrid: %s/sweep.tsv\n", result.k, result.l,
                        state.cfg.output_dir.c_str());
            return 0;
        }
        if (run->parsed()) {
            tcoref::PipelineResult result = tcoref::run_pipeline(state.cfg);
            std::cout << result.report_text;
            std::printf("report: %s/report.txt\n", state.cfg.output_dir.c_str());
            return result.failures.empty() ? 0 : 1;
        }
    } catch (const tcoref::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
