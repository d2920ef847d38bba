#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "tcoref/eval.hpp"
#include "tcoref/stopwords.hpp"

#include "support/oracles.hpp"
#include "support/table4.hpp"

using namespace tcoref;
namespace fs = std::filesystem;

namespace {

const Stopwords& stop() {
    static Stopwords s = load_wordlist(tcoref::testing::data_path("stopwords_en.txt"));
    return s;
}

Term T(const std::string& s) { return normalize_term(s, stop()); }

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& content) {
        path = fs::temp_directory_path() /
               ("tcoref-eval-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++) + ".txt");
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { fs::remove(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

}  // namespace

TEST_CASE("test set loading preserves groups and periods") {
    TempFile file("# comment\n"
                  "Sean Combs | Diddy, P. Diddy; Puff Daddy | 2005\n"
                  "\n"
                  "Kinect | Project Natal | 2009..2010\n");
    auto entries = load_testset(file.path.string(), stop());
    REQUIRE(entries.size() == 2);

    const TestEntry* combs = nullptr;
    for (const auto& e : entries)
        if (e.query == T("Sean Combs")) combs = &e;
    REQUIRE(combs);
    REQUIRE(combs->expected_groups.size() == 2);
    CHECK(combs->expected_groups[0] == std::set<Term>{T("Diddy"), T("P. Diddy")});
    CHECK(combs->expected_groups[1] == std::set<Term>{T("Puff Daddy")});
    REQUIRE(combs->periods.size() == 1);
    CHECK(combs->periods[0] == year_period(2005, 2005));
}

TEST_CASE("an empty test set file loads as an empty set") {
    TempFile file("# nothing here\n");
    CHECK(load_testset(file.path.string(), stop()).empty());
}

TEST_CASE("duplicate query rows merge") {
    TempFile file("Sean Combs | Diddy | 2005\n"
                  "Sean Combs | Puff Daddy | 2006\n");
    auto entries = load_testset(file.path.string(), stop());
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].expected_groups.size() == 2);
    CHECK(entries[0].periods.size() == 2);
}

TEST_CASE("malformed test set rows are an error") {
    TempFile file("Sean Combs | Diddy\n");
    CHECK_THROWS(load_testset(file.path.string(), stop()));
    TempFile no_groups("Sean Combs |  | 2005\n");
    CHECK_THROWS(load_testset(no_groups.path.string(), stop()));
}

TEST_CASE("a january change period admits the preceding year") {
    TempFile file("Sean Combs | Diddy | 2006-01\n"
                  "Kinect | Project Natal | 2010-07\n");
    auto entries = load_testset(file.path.string(), stop());
    for (const auto& e : entries) {
        if (e.query == T("Sean Combs")) {
            CHECK(e.periods[0] == ChangePeriod{Date{2005, 1, 1}, Date{2006, 12, 31}});
        } else {
            CHECK(e.periods[0] == year_period(2010, 2010));
        }
    }
}

namespace {

Corpus adaptation_corpus() {
    Corpus corpus;
    corpus.sources = {"s1"};
    corpus.documents = {
        {"d1", "Sean Combs met Puff Daddy.", {{2005, 5, 1}, 0}, "s1"},
        {"d2", "Kinect arrived.", {{2010, 6, 1}, 0}, "s1"},
    };
    return corpus;
}

}  // namespace

TEST_CASE("adaptation removes what the corpus cannot support") {
    std::vector<TestEntry> testset;
    {
        TestEntry e;  // query absent from the corpus
        e.query = T("Barack Obama");
        e.expected_groups = {{T("Senator Obama")}};
        e.periods = {year_period(2005, 2005)};
        testset.push_back(e);
    }
    {
        TestEntry e;  // one of two groups absent
        e.query = T("Sean Combs");
        e.expected_groups = {{T("Diddy"), T("P. Diddy")}, {T("Puff Daddy")}};
        e.periods = {year_period(2005, 2005)};
        testset.push_back(e);
    }
    {
        TestEntry e;  // all expected names absent
        e.query = T("Kinect");
        e.expected_groups = {{T("Project Natal")}};
        e.periods = {year_period(2010, 2010)};
        testset.push_back(e);
    }
    {
        TestEntry e;  // period outside the corpus range
        e.query = T("Sean Combs");
        e.expected_groups = {{T("Puff Daddy")}};
        e.periods = {year_period(1998, 1999)};
        testset.push_back(e);
    }

    auto adapted = adapt_testset(testset, adaptation_corpus());
    REQUIRE(adapted.size() == 1);
    CHECK(adapted[0].query == T("Sean Combs"));
    REQUIRE(adapted[0].expected_groups.size() == 1);
    CHECK(adapted[0].expected_groups[0] == std::set<Term>{T("Puff Daddy")});
}

TEST_CASE("recall thresholds follow the frequency tiers") {
    CHECK(recall_threshold(99) == 5);
    CHECK(recall_threshold(100) == 10);
    CHECK(recall_threshold(150) == 10);
    CHECK(recall_threshold(499) == 10);
    CHECK(recall_threshold(500) == 50);
    CHECK(recall_threshold(600) == 50);
    CHECK(recall_threshold(999) == 50);
    CHECK(recall_threshold(1000) == 100);
    CHECK(recall_threshold(1200) == 100);
    CHECK(recall_threshold(0) == 5);
}

TEST_CASE("recall over the example stages") {
    TestEntry entry = tcoref::testing::table4_entry(stop());
    auto freqs = tcoref::testing::table4_frequencies(stop());

    auto unfiltered = tcoref::testing::terms_from_surfaces(
        tcoref::testing::table4_unfiltered_surfaces(), stop());
    CHECK(recall(unfiltered, entry, freqs) == 1.0);

    std::set<Term> frequency;
    for (const auto& s : tcoref::testing::table4_frequency_survivors())
        frequency.insert(T(s));
    CHECK(recall(frequency, entry, freqs) == 1.0);

    CHECK(recall({T("Puff Daddy")}, entry, freqs) == 0.5);
    CHECK(recall({}, entry, freqs) == 0.0);
}

TEST_CASE("rare entities count as full recall when found at all") {
    TestEntry entry;
    entry.query = T("Ocho Cinco");
    entry.expected_groups = {{T("Chad Johnson")}};
    entry.periods = {year_period(2008, 2008)};
    std::map<Term, std::int64_t> freqs{{T("Chad Johnson"), 3}};  // nothing exceeds 5
    CHECK(recall({T("Chad Johnson")}, entry, freqs) == 1.0);
    CHECK(recall({T("Boston")}, entry, freqs) == 0.0);
}

TEST_CASE("precision over the example stages") {
    TestEntry entry = tcoref::testing::table4_entry(stop());

    auto unfiltered = tcoref::testing::terms_from_surfaces(
        tcoref::testing::table4_unfiltered_surfaces(), stop());
    auto p = precision(unfiltered, entry);
    REQUIRE(p);
    CHECK_THAT(*p, Catch::Matchers::WithinAbs(0.12, 0.01));
    CHECK(correct_result_count(unfiltered, entry) == 6);

    std::set<Term> frequency;
    for (const auto& s : tcoref::testing::table4_frequency_survivors())
        frequency.insert(T(s));
    auto pf = precision(frequency, entry);
    REQUIRE(pf);
    CHECK_THAT(*pf, Catch::Matchers::WithinAbs(0.67, 0.01));

    auto ps = precision({T("Puff Daddy")}, entry);
    REQUIRE(ps);
    CHECK(*ps == 1.0);

    CHECK_FALSE(precision({}, entry));
}

TEST_CASE("recall is monotone in the result set") {
    tcoref::testing::RandomCorpusBuilder gen(17);
    TestEntry entry = tcoref::testing::table4_entry(stop());
    auto freqs = tcoref::testing::table4_frequencies(stop());
    std::set<Term> result;
    double last = recall(result, entry, freqs);
    for (int i = 0; i < 30; ++i) {
        result.insert(T(gen.make_name()));
        if (i == 10) result.insert(T("Diddy"));
        if (i == 20) result.insert(T("Puff Daddy"));
        double now = recall(result, entry, freqs);
        CHECK(now >= last);
        last = now;
    }
}

TEST_CASE("evaluate aggregates per stage with macro averages") {
    std::vector<TestEntry> testset;
    TestEntry a;
    a.query = T("Sean Combs");
    a.expected_groups = {{T("Puff Daddy")}};
    a.periods = {year_period(2005, 2005)};
    testset.push_back(a);
    TestEntry b;
    b.query = T("Kinect");
    b.expected_groups = {{T("Project Natal")}};
    b.periods = {year_period(2010, 2010)};
    testset.push_back(b);

    std::map<Term, std::int64_t> freqs{{T("Puff Daddy"), 40}, {T("Project Natal"), 40}};

    StageResults results;
    results[T("Sean Combs")] = {T("Puff Daddy")};            // precision 1
    results[T("Kinect")] = {T("Boston")};                    // precision 0
    EvalReport report = evaluate({{"only", results}}, testset, freqs);
    REQUIRE(report.stages.size() == 1);
    const StageMetrics& m = report.stages[0];
    CHECK(m.macro_precision == 0.5);
    CHECK(m.macro_recall == 0.5);
    CHECK(m.macro_f == f_measure(0.5, 0.5));
    for (const auto& q : m.per_query) {
        CHECK(q.recall >= 0.0);
        CHECK(q.recall <= 1.0);
        if (q.precision) {
            CHECK(*q.precision >= 0.0);
            CHECK(*q.precision <= 1.0);
        }
    }

    // A single query aggregates to its own values.
    EvalReport solo = evaluate({{"only", results}}, {testset[0]}, freqs);
    CHECK(solo.stages[0].macro_precision == 1.0);
    CHECK(solo.stages[0].macro_recall == 1.0);
}

TEST_CASE("evaluate rejects an empty test set") {
    CHECK_THROWS_AS(evaluate({{"only", StageResults{}}}, {}, {}), std::invalid_argument);
}
