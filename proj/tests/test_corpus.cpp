#include <doctest.h>

#include "dlm/corpus.hpp"
#include "dlm/error.hpp"
#include "dlm/text.hpp"

#include "support.hpp"

#include <random>

using namespace dlm;
using testing_support::TempDir;
using testing_support::write_file;

TEST_CASE("utf8 round trip and lowercasing")
{
    const std::string s = "Bajazzotum äöü ß";
    CHECK(utf8_encode(utf8_decode(s)) == s);
    CHECK(utf8_decode("kivinä").size() == 6);
    CHECK(to_lower("Öffentlichkeit") == "öffentlichkeit");
    CHECK(to_lower("ABC") == "abc");
}

TEST_CASE("split, trim, join")
{
    CHECK(split("a\tb\t\tc", '\t') == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(trim("  x y \r\n") == "x y");
    CHECK(join({"a", "b", "c"}, ",") == "a,b,c");
}

TEST_CASE("lexicon rows keep file order and tags")
{
    TempDir tmp;
    const auto p = write_file(tmp / "lex.tsv", "form\tfrequency\tcase\tnumber\n"
                                               "vuonna\t120\tess\tsg\n"
                                               "kello\t80\tnom\tsg\n");
    const auto lex = load_lexicon(p);
    REQUIRE(lex.size() == 2);
    CHECK(lex[0].form == "vuonna");
    CHECK(lex[0].frequency == 120);
    CHECK(lex[0].tag("case") == "ess");
    CHECK(lex[0].tag("number") == "sg");
    CHECK(lex[1].form == "kello");
    CHECK(lex[1].tag("case") == "nom");
}

TEST_CASE("header-only lexicon is empty")
{
    TempDir tmp;
    CHECK(load_lexicon(write_file(tmp / "lex.tsv", "form\tfrequency\n")).empty());
}

TEST_CASE("non-integer frequency names its line")
{
    TempDir tmp;
    const auto p = write_file(tmp / "lex.tsv", "form\tfrequency\nabc\t3\nabd\tabc\n");
    try {
        load_lexicon(p);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("missing required column is a schema error")
{
    TempDir tmp;
    CHECK_THROWS_AS(load_lexicon(write_file(tmp / "lex.tsv", "form\tcount\na\t1\n")), SchemaError);
    CHECK_THROWS_AS(load_lexicon(write_file(tmp / "lex2.tsv", "word\tfrequency\na\t1\n")), SchemaError);
}

TEST_CASE("duplicate rows merge frequencies and require agreeing tags")
{
    TempDir tmp;
    const auto lex = load_lexicon(write_file(tmp / "a.tsv", "form\tfrequency\tcase\nHaus\t2\tnom\nhaus\t3\tnom\n"));
    REQUIRE(lex.size() == 1);
    CHECK(lex[0].form == "haus");
    CHECK(lex[0].frequency == 5);
    CHECK_THROWS_AS(load_lexicon(write_file(tmp / "b.tsv", "form\tfrequency\tcase\nx\t1\tnom\nx\t1\tgen\n")),
                    ParseError);

    LexiconSchema keep;
    keep.lowercase = false;
    CHECK(load_lexicon(tmp / "a.tsv", keep).size() == 2);
}

TEST_CASE("period and role columns")
{
    TempDir tmp;
    const auto lex =
        load_lexicon(write_file(tmp / "m.tsv", "form\tfrequency\tyear\trole\nfreiheit\t4\t1893\tinput\n"
                                               "bajazzotum\t1\t1897\toutput\n"));
    REQUIRE(lex.size() == 2);
    CHECK(lex[0].period == 1893);
    CHECK(lex[0].role == Role::input);
    CHECK(lex[1].role == Role::output);
}

TEST_CASE("embeddings: header, arity and finiteness")
{
    TempDir tmp;
    const auto t = load_embeddings(write_file(tmp / "e.vec", "2 3\na 1 0 0\nb 0 1 0\n"));
    CHECK(t.dim() == 3);
    CHECK(t.size() == 2);
    CHECK(t.at("b")(1) == 1.0);

    try {
        load_embeddings(write_file(tmp / "bad.vec", "3 3\na 1 0 0\nb 0 1 0\nc 1 2\n"));
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
    }
    CHECK_THROWS_AS(load_embeddings(write_file(tmp / "nan.vec", "1 2\na nan 0\n")), ParseError);
    CHECK_THROWS_AS(load_embeddings(write_file(tmp / "inf.vec", "1 2\na 1 inf\n")), ParseError);
}

TEST_CASE("duplicate embedding rows keep the first vector")
{
    TempDir tmp;
    const auto t = load_embeddings(write_file(tmp / "e.vec", "3 2\na 1 2\nb 3 4\na 5 6\n"));
    CHECK(t.size() == 2);
    CHECK(t.at("a")(0) == 1.0);
    REQUIRE(t.duplicates().size() == 1);
    CHECK(t.duplicates()[0] == "a");
}

TEST_CASE("embedding write/read round trip")
{
    TempDir tmp;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    EmbeddingTable t(50);
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd v(50);
        for (auto& x : v)
            x = g(rng);
        t.add("w" + std::to_string(i), v);
    }
    write_embeddings(tmp / "rt.vec", t);
    const auto back = load_embeddings(tmp / "rt.vec");
    REQUIRE(back.size() == 10);
    CHECK(back.words() == t.words());
    CHECK((back.matrix() - t.matrix()).cwiseAbs().maxCoeff() < 1e-6);
}

namespace {

std::vector<WordEntry> entries(std::initializer_list<std::pair<const char*, const char*>> forms_lemmas)
{
    std::vector<WordEntry> out;
    for (const auto& [f, l] : forms_lemmas) {
        WordEntry e;
        e.form = f;
        e.lemma = l;
        e.frequency = 1;
        out.push_back(e);
    }
    return out;
}

EmbeddingTable table(std::initializer_list<std::pair<const char*, std::vector<double>>> rows)
{
    EmbeddingTable t(Eigen::Index(rows.begin()->second.size()));
    for (const auto& [w, v] : rows)
        t.add(w, Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size())));
    return t;
}

} // namespace

TEST_CASE("assemble_dataset drops words without vectors")
{
    const auto lex = entries({{"a", "a"}, {"b", "b"}, {"c", "c"}});
    const auto t = table({{"a", {1, 0}}, {"c", {0, 1}}});
    const auto d = assemble_dataset(lex, t);
    CHECK(d.size() == 2);
    REQUIRE(d.dropped.size() == 1);
    CHECK(d.dropped[0].word == "b");
    CHECK(d.dropped[0].reason == "no embedding");
    CHECK(d.size() + Eigen::Index(d.dropped.size()) == Eigen::Index(lex.size()));
    CHECK(d.semantics.rows() == 2);
    CHECK(d.semantics.cols() == d.dim);

    const auto all = assemble_dataset(entries({{"a", "a"}, {"c", "c"}}), t);
    CHECK(all.dropped.empty());

    CHECK_THROWS_AS(assemble_dataset(entries({{"z", "z"}}), t), EmptyDatasetError);
}

TEST_CASE("lemma join shares the lemma vector")
{
    const auto lex = entries({{"hauses", "haus"}, {"häuser", "haus"}, {"baum", "baum"}});
    const auto t = table({{"haus", {1, 2, 3}}, {"baum", {0, 1, 0}}});
    const auto d = assemble_dataset(lex, t, JoinKey::lemma);
    REQUIRE(d.size() == 3);
    CHECK(d.semantics.row(0) == d.semantics.row(1));
    CHECK(d.semantics.row(0) == t.at("haus"));
    CHECK(d.keys[0] == "haus");
    CHECK(d.entries[1].form == "häuser");
}

TEST_CASE("assembling twice is deterministic")
{
    const auto lex = entries({{"a", "a"}, {"b", "b"}, {"c", "c"}});
    const auto t = table({{"c", {0, 1}}, {"a", {1, 0}}, {"b", {1, 1}}});
    const auto d1 = assemble_dataset(lex, t);
    const auto d2 = assemble_dataset(lex, t);
    CHECK(d1.keys == d2.keys);
    CHECK(d1.semantics == d2.semantics);
    CHECK(d1.keys == std::vector<std::string>{"a", "b", "c"});
}
