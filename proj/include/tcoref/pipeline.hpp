#ifndef TCOREF_PIPELINE_HPP
#define TCOREF_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcoref/context_graph.hpp"
#include "tcoref/coref.hpp"
#include "tcoref/corpus.hpp"
#include "tcoref/eval.hpp"
#include "tcoref/kb.hpp"
#include "tcoref/kb_http.hpp"
#include "tcoref/postfilter.hpp"
#include "tcoref/reduction.hpp"
#include "tcoref/semantic.hpp"
#include "tcoref/stopwords.hpp"

namespace tcoref {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    std::string corpus_path;
    std::string testset_path;
    std::string stopwords_path = "data/stopwords_en.txt";
    std::string output_dir = "out";
    std::string kb_snapshot;
    std::string kb_endpoint;
    std::string kb_cache_dir;
    std::string extraction_cache;
    std::size_t window = 10;
    AprioriParams apriori;
    PostFilterParams postfilter;
    bool english_gate = false;
    bool frequency_stage = true;
    bool semantic_stage = true;
    double sweep_step = 0.05;
};

// Simple key=value configuration file; every key has a matching CLI flag and
// flags win over file values.
inline PipelineConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    PipelineConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        auto as_bool = [&] { return value == "1" || value == "true" || value == "on"; };
        if (key == "corpus") cfg.corpus_path = value;
        else if (key == "testset") cfg.testset_path = value;
        else if (key == "stopwords") cfg.stopwords_path = value;
        else if (key == "output") cfg.output_dir = value;
        else if (key == "kb_snapshot") cfg.kb_snapshot = value;
        else if (key == "kb_endpoint") cfg.kb_endpoint = value;
        else if (key == "kb_cache") cfg.kb_cache_dir = value;
        else if (key == "extraction_cache") cfg.extraction_cache = value;
        else if (key == "window") cfg.window = std::stoul(value);
        else if (key == "target_terms") cfg.apriori.target_terms = std::stoul(value);
        else if (key == "decay") cfg.apriori.decay = std::stod(value);
        else if (key == "start_fraction") cfg.apriori.start_fraction = std::stod(value);
        else if (key == "src_fraction") cfg.apriori.src_fraction = std::stod(value);
        else if (key == "rel_src_fraction") cfg.apriori.rel_src_fraction = std::stod(value);
        else if (key == "floor") cfg.apriori.floor = std::stod(value);
        else if (key == "k") cfg.postfilter.frequency_factor_k = std::stod(value);
        else if (key == "l") cfg.postfilter.weight_factor_l = std::stod(value);
        else if (key == "filter_mode")
            cfg.postfilter.mode = value == "formula" ? PostFilterParams::Mode::formula
                                                     : PostFilterParams::Mode::prose;
        else if (key == "english_gate") cfg.english_gate = as_bool();
        else if (key == "frequency_filter") cfg.frequency_stage = as_bool();
        else if (key == "semantic_filter") cfg.semantic_stage = as_bool();
        else if (key == "sweep_step") cfg.sweep_step = std::stod(value);
        else throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown key " + key);
    }
    return cfg;
}

inline void validate_config(const PipelineConfig& cfg) {
    namespace fs = std::filesystem;
    if (cfg.corpus_path.empty() || !fs::exists(cfg.corpus_path))
        throw ConfigError("corpus file missing: '" + cfg.corpus_path + "'");
    if (cfg.testset_path.empty() || !fs::exists(cfg.testset_path))
        throw ConfigError("test set missing: '" + cfg.testset_path + "'");
    if (cfg.stopwords_path.empty() || !fs::exists(cfg.stopwords_path))
        throw ConfigError("stopword list missing: '" + cfg.stopwords_path + "'");
    if (!cfg.kb_snapshot.empty() && !cfg.kb_endpoint.empty())
        throw ConfigError("select exactly one KB backend: snapshot or endpoint");
    if (!cfg.kb_snapshot.empty() && !fs::exists(cfg.kb_snapshot))
        throw ConfigError("KB snapshot missing: '" + cfg.kb_snapshot + "'");
    if (cfg.semantic_stage && cfg.kb_snapshot.empty() && cfg.kb_endpoint.empty())
        throw ConfigError("semantic filtering needs --kb-snapshot or --kb-endpoint");
    if (cfg.window < 1) throw ConfigError("window must be >= 1");
    if (cfg.postfilter.frequency_factor_k < 0 || cfg.postfilter.frequency_factor_k > 1 ||
        cfg.postfilter.weight_factor_l < 0 || cfg.postfilter.weight_factor_l > 1)
        throw ConfigError("k and l must be within [0, 1]");
    if (cfg.output_dir.empty()) throw ConfigError("output directory not set");
}

inline std::unique_ptr<KnowledgeBase> make_kb(const PipelineConfig& cfg) {
    if (!cfg.kb_snapshot.empty())
        return std::make_unique<SnapshotKb>(SnapshotKb::from_file(cfg.kb_snapshot));
    if (!cfg.kb_endpoint.empty())
        return std::make_unique<SparqlKb>(cfg.kb_endpoint, cfg.kb_cache_dir);
    return nullptr;
}

namespace pipeline_detail {

inline std::uint64_t fnv64(std::string_view data, std::uint64_t h = 14695981039346656037ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t hash_file(const std::string& path, std::uint64_t h) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return h;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h = fnv64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    return h;
}

inline std::string slug(std::string_view text) {
    std::string out;
    for (char c : fold_case(text)) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) out += c;
        else if (!out.empty() && out.back() != '-') out += '-';
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out.empty() ? "x" : out;
}

}  // namespace pipeline_detail

// Fingerprint of everything that influences a run's outputs; cache keys and
// re-run skipping are based on it.
inline std::string config_hash(const PipelineConfig& cfg) {
    using pipeline_detail::fnv64;
    using pipeline_detail::hash_file;
    std::ostringstream canon;
    canon << cfg.window << '|' << cfg.apriori.start_fraction << '|' << cfg.apriori.src_fraction
          << '|' << cfg.apriori.rel_src_fraction << '|' << cfg.apriori.decay << '|'
          << cfg.apriori.floor << '|' << cfg.apriori.target_terms << '|'
          << cfg.postfilter.frequency_factor_k << '|' << cfg.postfilter.weight_factor_l << '|'
          << static_cast<int>(cfg.postfilter.mode) << '|' << cfg.english_gate << '|'
          << cfg.frequency_stage << '|' << cfg.semantic_stage << '|' << cfg.kb_endpoint;
    std::uint64_t h = fnv64(canon.str());
    h = hash_file(cfg.corpus_path, h);
    h = hash_file(cfg.testset_path, h);
    h = hash_file(cfg.stopwords_path, h);
    if (!cfg.kb_snapshot.empty()) h = hash_file(cfg.kb_snapshot, h);
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Everything detected for one (query, period) cell before a-posteriori
// filtering, plus the lexical context the semantic stage needs.
struct DetectedCell {
    Term query;
    ChangePeriod period;
    ChangePeriod narrowed;
    std::size_t retained_sources = 0;
    std::size_t considered_documents = 0;
    std::set<Candidate> unfiltered;
    CorefContext context;
    std::map<Term, SubtermClass> classes;
    ContextGraph graph;
    bool query_absent = false;  // query not in any source during the period
};

// Reduction, graph building, a-priori filtering, prolong, classes,
// consolidation and candidate derivation for one query and period.
inline DetectedCell detect_cell(const Corpus& corpus, const Term& query,
                                const ChangePeriod& period, const Stopwords& stopwords,
                                const PipelineConfig& cfg, const KnowledgeBase* kb,
                                ExtractionCache* cache = nullptr) {
    DetectedCell cell;
    cell.query = query;
    cell.period = period;

    ReducedDataset reduced = filter_sources(corpus, query, period);
    if (reduced.empty()) {
        cell.query_absent = true;
        return cell;
    }
    cell.retained_sources = reduced.sources.size();
    cell.narrowed = narrow_period(reduced, query, period);
    auto documents = query_documents(reduced, query, cell.narrowed, QueryMode::any_sub_term);
    cell.considered_documents = documents.size();

    ContextGraph graph = build_context_graph(documents, cfg.window, stopwords, cache);
    graph = apriori_filter(graph, query, cfg.apriori);
    if (kb) install_prolonged(graph, prolong(graph, *kb));

    if (!graph.has_node(query))
        throw std::runtime_error("query term was not extracted: '" + query.surface + "'");

    cell.classes = compute_subterm_classes(graph);
    ClassGraph cg = consolidate(graph, cell.classes);
    cell.unfiltered = make_candidates(query, cg);

    // Lexical context for the semantic stage: direct and indirect
    // co-references with node document frequencies.
    auto node_freq = [&](const Term& t) {
        auto it = graph.nodes.find(t);
        return it == graph.nodes.end() ? std::int64_t{0} : it->second.doc_freq;
    };
    std::set<Term> of_interest{query};
    for (const auto& c : cell.unfiltered) of_interest.insert(c.term);
    for (const auto& t : of_interest) {
        cell.context.term_freq[t] = node_freq(t);
        std::vector<RankedTerm> direct;
        for (const auto& d : direct_corefs(t, cell.classes))
            direct.push_back(RankedTerm{d, node_freq(d)});
        cell.context.direct[t] = std::move(direct);
        std::vector<RankedTerm> indirect;
        for (const auto& d : indirect_corefs(t, cg, cell.classes))
            indirect.push_back(RankedTerm{d, node_freq(d)});
        cell.context.indirect[t] = std::move(indirect);
    }
    cell.graph = std::move(graph);
    return cell;
}

namespace pipeline_detail {

inline nlohmann::json ranked_to_json(const std::vector<RankedTerm>& terms) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : terms) arr.push_back({r.term.surface, r.freq});
    return arr;
}

inline std::vector<RankedTerm> ranked_from_json(const nlohmann::json& arr,
                                                const Stopwords& stopwords) {
    std::vector<RankedTerm> out;
    for (const auto& item : arr)
        out.push_back(RankedTerm{normalize_term(item.at(0).get<std::string>(), stopwords),
                                 item.at(1).get<std::int64_t>()});
    return out;
}

}  // namespace pipeline_detail

inline void write_candidates(const std::set<Candidate>& candidates, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "term\tdf\tsf\tsub\n";
    for (const auto& c : candidates) {
        out << c.term.surface << '\t' << c.df << '\t' << c.sf << '\t';
        bool first = true;
        for (const auto& s : c.sub) {
            if (!first) out << ';';
            out << s.surface;
            first = false;
        }
        out << '\n';
    }
}

inline std::set<Candidate> read_candidates(const std::string& path,
                                           const Stopwords& stopwords) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing intermediate: " + path +
                                      " (run 'detect' first)");
    std::set<Candidate> out;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = corpus_detail::split_tabs(line);
        if (fields.size() != 4) throw std::runtime_error("malformed candidate row in " + path);
        Candidate c;
        c.term = normalize_term(fields[0], stopwords);
        c.df = std::stoll(std::string(fields[1]));
        c.sf = std::stoll(std::string(fields[2]));
        if (!fields[3].empty()) {
            std::size_t start = 0;
            std::string_view subs = fields[3];
            for (std::size_t i = 0; i <= subs.size(); ++i) {
                if (i == subs.size() || subs[i] == ';') {
                    if (i > start) c.sub.insert(normalize_term(subs.substr(start, i - start),
                                                               stopwords));
                    start = i + 1;
                }
            }
        }
        out.insert(std::move(c));
    }
    return out;
}

inline void write_context(const CorefContext& ctx, const std::string& path) {
    nlohmann::json doc;
    nlohmann::json direct = nlohmann::json::object();
    nlohmann::json indirect = nlohmann::json::object();
    nlohmann::json freq = nlohmann::json::object();
    std::map<std::string, std::string> surfaces;
    for (const auto& [term, ranked] : ctx.direct) {
        direct[term.key()] = pipeline_detail::ranked_to_json(ranked);
        surfaces[term.key()] = term.surface;
    }
    for (const auto& [term, ranked] : ctx.indirect) {
        indirect[term.key()] = pipeline_detail::ranked_to_json(ranked);
        surfaces[term.key()] = term.surface;
    }
    for (const auto& [term, f] : ctx.term_freq) {
        freq[term.key()] = f;
        surfaces[term.key()] = term.surface;
    }
    doc["direct"] = std::move(direct);
    doc["indirect"] = std::move(indirect);
    doc["term_freq"] = std::move(freq);
    doc["surfaces"] = surfaces;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << doc.dump(1) << '\n';
}

inline CorefContext read_context(const std::string& path, const Stopwords& stopwords) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing intermediate: " + path +
                                      " (run 'detect' first)");
    nlohmann::json doc;
    in >> doc;
    CorefContext ctx;
    auto surfaces = doc.at("surfaces");
    auto term_of = [&](const std::string& key) {
        return normalize_term(surfaces.at(key).get<std::string>(), stopwords);
    };
    for (const auto& [key, arr] : doc.at("direct").items())
        ctx.direct[term_of(key)] = pipeline_detail::ranked_from_json(arr, stopwords);
    for (const auto& [key, arr] : doc.at("indirect").items())
        ctx.indirect[term_of(key)] = pipeline_detail::ranked_from_json(arr, stopwords);
    for (const auto& [key, f] : doc.at("term_freq").items())
        ctx.term_freq[term_of(key)] = f.get<std::int64_t>();
    return ctx;
}

struct PipelineResult {
    EvalReport report;
    std::vector<std::string> failures;
    std::map<Term, std::set<Term>> unfiltered, frequency, semantic;
    std::string report_text;
};

namespace pipeline_detail {

inline std::string cell_dir(const PipelineConfig& cfg, const Term& query,
                            const ChangePeriod& period) {
    return cfg.output_dir + "/queries/" + slug(query.surface) + "/" + slug(period.str());
}

inline std::string format_pct(double v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%5.1f%%", v * 100.0);
    return buf;
}

inline std::string format_f(double v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace pipeline_detail

inline std::string render_report(const EvalReport& report,
                                 const std::vector<std::string>& failures) {
    using pipeline_detail::format_f;
    using pipeline_detail::format_pct;
    std::ostringstream out;
    out << "stage                 precision   recall  f-measure   (macro; micro in parens)\n";
    for (const auto& s : report.stages) {
        out << s.stage;
        for (std::size_t i = s.stage.size(); i < 22; ++i) out << ' ';
        out << format_pct(s.macro_precision) << "  " << format_pct(s.macro_recall) << "   "
            << format_f(s.macro_f) << "  (" << format_pct(s.micro_precision) << " "
            << format_pct(s.micro_recall) << " " << format_f(s.micro_f) << ")\n";
    }
    out << "\nper-query:\n";
    for (const auto& s : report.stages) {
        for (const auto& q : s.per_query) {
            out << "  " << s.stage << " | " << q.query.surface << " | P=";
            out << (q.precision ? format_pct(*q.precision) : std::string("  no-result"));
            out << " R=" << format_pct(q.recall) << "\n";
        }
    }
    if (!failures.empty()) {
        out << "\nfailures:\n";
        for (const auto& f : failures) out << "  " << f << "\n";
    }
    return out.str();
}

inline nlohmann::json report_to_json(const EvalReport& report,
                                     const std::vector<std::string>& failures) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : report.stages) {
        nlohmann::json per_query = nlohmann::json::array();
        for (const auto& q : s.per_query) {
            nlohmann::json row{{"query", q.query.surface}, {"recall", q.recall}};
            if (q.precision) row["precision"] = *q.precision;
            else row["no_result"] = true;
            per_query.push_back(std::move(row));
        }
        stages.push_back({{"stage", s.stage},
                          {"macro_precision", s.macro_precision},
                          {"macro_recall", s.macro_recall},
                          {"macro_f", s.macro_f},
                          {"micro_precision", s.micro_precision},
                          {"micro_recall", s.micro_recall},
                          {"micro_f", s.micro_f},
                          {"queries", std::move(per_query)}});
    }
    return nlohmann::json{{"stages", std::move(stages)}, {"failures", failures}};
}

// The full batch pipeline: ingest, adapt the test set, then per query and
// change period run reduction, context graph construction, co-reference
// detection, frequency filtering and semantic filtering, persisting the
// intermediates of every stage; finally evaluate all three stages.
// Deterministic for a fixed snapshot and configuration. A failing query is
// recorded and skipped, it does not abort the run.
inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
    validate_config(cfg);
    namespace fs = std::filesystem;
    Stopwords stopwords = load_wordlist(cfg.stopwords_path);
    IngestResult ingested =
        ingest_corpus(cfg.corpus_path, CorpusFormat::lines,
                      cfg.english_gate ? &stopwords : nullptr);
    const Corpus& corpus = ingested.corpus;

    std::vector<TestEntry> testset =
        adapt_testset(load_testset(cfg.testset_path, stopwords), corpus);
    if (testset.empty()) throw std::runtime_error("no test entries remain after adaptation");
    std::map<Term, std::int64_t> freqs = expected_name_frequencies(testset, corpus);

    std::unique_ptr<KnowledgeBase> kb = make_kb(cfg);
    std::unique_ptr<ExtractionCache> extraction_cache;
    if (!cfg.extraction_cache.empty())
        extraction_cache = std::make_unique<ExtractionCache>(cfg.extraction_cache);

    const std::string run_key = config_hash(cfg);
    PipelineResult result;
    for (const auto& entry : testset) {
        auto& unfiltered_terms = result.unfiltered[entry.query];
        auto& frequency_terms = result.frequency[entry.query];
        auto& semantic_terms = result.semantic[entry.query];
        for (const auto& period : entry.periods) {
            std::string dir = pipeline_detail::cell_dir(cfg, entry.query, period);
            try {
                fs::create_directories(dir);
                std::set<Candidate> unfiltered, frequency, semantic;
                CorefContext ctx;

                std::string key_path = dir + "/cache.key";
                bool cached = false;
                {
                    std::ifstream key_in(key_path);
                    std::string existing;
                    if (key_in && std::getline(key_in, existing) && existing == run_key &&
                        fs::exists(dir + "/candidates_unfiltered.tsv") &&
                        fs::exists(dir + "/candidates_frequency.tsv") &&
                        fs::exists(dir + "/candidates_semantic.tsv"))
                        cached = true;
                }
                if (cached) {
                    unfiltered = read_candidates(dir + "/candidates_unfiltered.tsv", stopwords);
                    frequency = read_candidates(dir + "/candidates_frequency.tsv", stopwords);
                    semantic = read_candidates(dir + "/candidates_semantic.tsv", stopwords);
                } else {
                    DetectedCell cell = detect_cell(corpus, entry.query, period, stopwords,
                                                    cfg, kb.get(), extraction_cache.get());
                    if (cell.query_absent) {
                        std::ofstream note(dir + "/reduction.txt");
                        note << "query absent in period " << period.str() << "\n";
                        continue;
                    }
                    unfiltered = cell.unfiltered;
                    ctx = cell.context;

                    frequency = cfg.frequency_stage
                                    ? aposteriori_filter(unfiltered, cfg.postfilter)
                                    : unfiltered;
                    semantic = cfg.semantic_stage && kb
                                   ? semantic_filter(entry.query, frequency, ctx, *kb)
                                   : frequency;

                    {
                        std::ofstream note(dir + "/reduction.txt");
                        note << "retained_sources\t" << cell.retained_sources << "\n"
                             << "narrowed_period\t" << cell.narrowed.str() << "\n"
                             << "documents\t" << cell.considered_documents << "\n";
                    }
                    {
                        std::ofstream nodes(dir + "/graph_nodes.tsv");
                        dump_nodes(cell.graph, nodes);
                        std::ofstream edges(dir + "/graph_edges.tsv");
                        dump_edges(cell.graph, edges);
                        std::ofstream classes(dir + "/classes.txt");
                        dump_classes(cell.classes, classes);
                    }
                    write_candidates(unfiltered, dir + "/candidates_unfiltered.tsv");
                    write_candidates(frequency, dir + "/candidates_frequency.tsv");
                    write_candidates(semantic, dir + "/candidates_semantic.tsv");
                    write_context(ctx, dir + "/context.json");
                    std::ofstream key_out(key_path);
                    key_out << run_key << "\n";
                }

                for (const auto& c : unfiltered) unfiltered_terms.insert(c.term);
                for (const auto& c : frequency) frequency_terms.insert(c.term);
                for (const auto& c : semantic) semantic_terms.insert(c.term);
            } catch (const std::exception& e) {
                result.failures.push_back(entry.query.surface + " @ " + period.str() + ": " +
                                          e.what());
            }
        }
    }
    if (extraction_cache) extraction_cache->save();

    result.report = evaluate({{"unfiltered", result.unfiltered},
                              {"frequency-filtered", result.frequency},
                              {"semantic-filtered", result.semantic}},
                             testset, freqs);
    result.report_text = render_report(result.report, result.failures);

    fs::create_directories(cfg.output_dir);
    {
        std::ofstream out(cfg.output_dir + "/report.txt");
        out << result.report_text;
    }
    {
        std::ofstream out(cfg.output_dir + "/report.json");
        out << report_to_json(result.report, result.failures).dump(1) << '\n';
    }
    return result;
}

namespace pipeline_detail {

struct LoadedInputs {
    Stopwords stopwords;
    Corpus corpus;
    std::vector<TestEntry> testset;
};

inline LoadedInputs load_inputs(const PipelineConfig& cfg) {
    LoadedInputs inputs;
    inputs.stopwords = load_wordlist(cfg.stopwords_path);
    inputs.corpus = ingest_corpus(cfg.corpus_path, CorpusFormat::lines,
                                  cfg.english_gate ? &inputs.stopwords : nullptr)
                        .corpus;
    inputs.testset = adapt_testset(load_testset(cfg.testset_path, inputs.stopwords),
                                   inputs.corpus);
    if (inputs.testset.empty())
        throw std::runtime_error("no test entries remain after adaptation");
    return inputs;
}

}  // namespace pipeline_detail

// `detect`: reduction through candidate derivation; persists the unfiltered
// candidates, lexical context, graph and class dumps per (query, period).
inline std::vector<std::string> run_detect(const PipelineConfig& cfg) {
    validate_config(cfg);
    namespace fs = std::filesystem;
    auto inputs = pipeline_detail::load_inputs(cfg);
    std::unique_ptr<KnowledgeBase> kb = make_kb(cfg);
    std::unique_ptr<ExtractionCache> extraction_cache;
    if (!cfg.extraction_cache.empty())
        extraction_cache = std::make_unique<ExtractionCache>(cfg.extraction_cache);

    std::vector<std::string> failures;
    for (const auto& entry : inputs.testset) {
        for (const auto& period : entry.periods) {
            std::string dir = pipeline_detail::cell_dir(cfg, entry.query, period);
            try {
                fs::create_directories(dir);
                DetectedCell cell = detect_cell(inputs.corpus, entry.query, period,
                                                inputs.stopwords, cfg, kb.get(),
                                                extraction_cache.get());
                std::ofstream note(dir + "/reduction.txt");
                if (cell.query_absent) {
                    note << "query absent in period " << period.str() << "\n";
                    continue;
                }
                note << "retained_sources\t" << cell.retained_sources << "\n"
                     << "narrowed_period\t" << cell.narrowed.str() << "\n"
                     << "documents\t" << cell.considered_documents << "\n";
                std::ofstream nodes(dir + "/graph_nodes.tsv");
                dump_nodes(cell.graph, nodes);
                std::ofstream edges(dir + "/graph_edges.tsv");
                dump_edges(cell.graph, edges);
                std::ofstream classes(dir + "/classes.txt");
                dump_classes(cell.classes, classes);
                write_candidates(cell.unfiltered, dir + "/candidates_unfiltered.tsv");
                write_context(cell.context, dir + "/context.json");
            } catch (const std::exception& e) {
                failures.push_back(entry.query.surface + " @ " + period.str() + ": " +
                                   e.what());
            }
        }
    }
    if (extraction_cache) extraction_cache->save();
    return failures;
}

// `filter`: reads persisted unfiltered candidates, applies the a-posteriori
// frequency filter and the semantic filter, persists both stage outputs.
inline std::vector<std::string> run_filter(const PipelineConfig& cfg) {
    validate_config(cfg);
    auto inputs = pipeline_detail::load_inputs(cfg);
    std::unique_ptr<KnowledgeBase> kb = make_kb(cfg);

    std::vector<std::string> failures;
    for (const auto& entry : inputs.testset) {
        for (const auto& period : entry.periods) {
            std::string dir = pipeline_detail::cell_dir(cfg, entry.query, period);
            if (!std::filesystem::exists(dir + "/candidates_unfiltered.tsv")) continue;
            try {
                std::set<Candidate> unfiltered =
                    read_candidates(dir + "/candidates_unfiltered.tsv", inputs.stopwords);
                CorefContext ctx = read_context(dir + "/context.json", inputs.stopwords);
                std::set<Candidate> frequency =
                    cfg.frequency_stage ? aposteriori_filter(unfiltered, cfg.postfilter)
                                        : unfiltered;
                std::set<Candidate> semantic =
                    cfg.semantic_stage && kb
                        ? semantic_filter(entry.query, frequency, ctx, *kb)
                        : frequency;
                write_candidates(frequency, dir + "/candidates_frequency.tsv");
                write_candidates(semantic, dir + "/candidates_semantic.tsv");
            } catch (const std::exception& e) {
                failures.push_back(entry.query.surface + " @ " + period.str() + ": " +
                                   e.what());
            }
        }
    }
    return failures;
}

// `evaluate`: reads the persisted per-stage candidate files and emits the
// metric report.
inline PipelineResult run_evaluate(const PipelineConfig& cfg) {
    validate_config(cfg);
    auto inputs = pipeline_detail::load_inputs(cfg);
    std::map<Term, std::int64_t> freqs = expected_name_frequencies(inputs.testset,
                                                                   inputs.corpus);
    PipelineResult result;
    for (const auto& entry : inputs.testset) {
        auto& unfiltered_terms = result.unfiltered[entry.query];
        auto& frequency_terms = result.frequency[entry.query];
        auto& semantic_terms = result.semantic[entry.query];
        for (const auto& period : entry.periods) {
            std::string dir = pipeline_detail::cell_dir(cfg, entry.query, period);
            for (auto [file, terms] :
                 {std::pair{"/candidates_unfiltered.tsv", &unfiltered_terms},
                  std::pair{"/candidates_frequency.tsv", &frequency_terms},
                  std::pair{"/candidates_semantic.tsv", &semantic_terms}}) {
                std::string path = dir + file;
                if (!std::filesystem::exists(path)) continue;
                for (const auto& c : read_candidates(path, inputs.stopwords))
                    terms->insert(c.term);
            }
        }
    }
    result.report = evaluate({{"unfiltered", result.unfiltered},
                              {"frequency-filtered", result.frequency},
                              {"semantic-filtered", result.semantic}},
                             inputs.testset, freqs);
    result.report_text = render_report(result.report, result.failures);
    std::filesystem::create_directories(cfg.output_dir);
    {
        std::ofstream out(cfg.output_dir + "/report.txt");
        out << result.report_text;
    }
    {
        std::ofstream out(cfg.output_dir + "/report.json");
        out << report_to_json(result.report, result.failures).dump(1) << '\n';
    }
    return result;
}

// `sweep`: grid search over (k, l) on the persisted unfiltered candidates,
// with semantic filtering downstream when configured. Emits the grid as a
// tab-separated report and returns the best cell.
inline SweepResult run_sweep(const PipelineConfig& cfg) {
    validate_config(cfg);
    auto inputs = pipeline_detail::load_inputs(cfg);
    std::map<Term, std::int64_t> freqs = expected_name_frequencies(inputs.testset,
                                                                   inputs.corpus);
    std::unique_ptr<KnowledgeBase> kb = make_kb(cfg);

    // Candidate sets and contexts merged across periods per query.
    std::vector<QueryCandidates> per_query;
    std::map<Term, CorefContext> contexts;
    for (const auto& entry : inputs.testset) {
        std::map<Term, Candidate> merged;
        CorefContext merged_ctx;
        for (const auto& period : entry.periods) {
            std::string dir = pipeline_detail::cell_dir(cfg, entry.query, period);
            if (!std::filesystem::exists(dir + "/candidates_unfiltered.tsv")) continue;
            for (const auto& c :
                 read_candidates(dir + "/candidates_unfiltered.tsv", inputs.stopwords)) {
                auto [it, inserted] = merged.emplace(c.term, c);
                if (!inserted) {
                    it->second.df = std::max(it->second.df, c.df);
                    it->second.sf = std::max(it->second.sf, c.sf);
                }
            }
            CorefContext ctx = read_context(dir + "/context.json", inputs.stopwords);
            for (auto& [t, v] : ctx.direct) merged_ctx.direct.emplace(t, std::move(v));
            for (auto& [t, v] : ctx.indirect) merged_ctx.indirect.emplace(t, std::move(v));
            for (auto& [t, f] : ctx.term_freq) {
                auto [it, inserted] = merged_ctx.term_freq.emplace(t, f);
                if (!inserted) it->second = std::max(it->second, f);
            }
        }
        if (merged.empty()) continue;
        QueryCandidates qc;
        qc.query = entry.query;
        for (auto& [t, c] : merged) {
            (void)t;
            qc.candidates.insert(c);
        }
        per_query.push_back(std::move(qc));
        contexts[entry.query] = std::move(merged_ctx);
    }

    SemanticHandle handle;
    if (cfg.semantic_stage && kb) {
        const KnowledgeBase* kb_ptr = kb.get();
        auto ctx_by_query = std::make_shared<std::map<Term, CorefContext>>(std::move(contexts));
        handle = [kb_ptr, ctx_by_query](const Term& q, const std::set<Candidate>& cands) {
            auto it = ctx_by_query->find(q);
            static const CorefContext kEmpty;
            return semantic_filter(q, cands, it == ctx_by_query->end() ? kEmpty : it->second,
                                   *kb_ptr);
        };
    }

    SweepResult result = sweep_parameters(per_query, inputs.testset, freqs, handle,
                                          cfg.sweep_step);
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream out(cfg.output_dir + "/sweep.tsv");
    out << "k\tl\tprecision\trecall\tf\n";
    char buf[128];
    for (const auto& cell : result.grid) {
        std::snprintf(buf, sizeof(buf), "%.2f\t%.2f\t%.4f\t%.4f\t%.4f\n", cell.k, cell.l,
                      cell.precision, cell.recall, cell.f);
        out << buf;
    }
    return result;
}

}  // namespace tcoref

#endif  // TCOREF_PIPELINE_HPP
